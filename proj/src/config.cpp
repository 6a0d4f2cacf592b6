#include "ncentre/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace ncentre {

std::string format_double(double v) {
  if (std::isnan(v)) return ".nan";
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(const YAML::Mark& m, const std::string& what) {
  if (m.is_null()) throw Error(ErrorCode::ParseError, what);
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ": " + what);
}

double to_double(const YAML::Node& v, const std::string& key) {
  if (!v.IsScalar()) parse_fail(v.Mark(), key + " must be a number");
  try {
    return v.as<double>();
  } catch (const YAML::BadConversion&) {
    parse_fail(v.Mark(), key + " must be a number, got '" + v.Scalar() + "'");
  }
}

long long to_integer(const YAML::Node& v, const std::string& key) {
  if (!v.IsScalar()) parse_fail(v.Mark(), key + " must be an integer");
  try {
    return v.as<long long>();
  } catch (const YAML::BadConversion&) {
    parse_fail(v.Mark(), key + " must be an integer, got '" + v.Scalar() + "'");
  }
}

Vec3 to_vec(const YAML::Node& v, const std::string& key) {
  if (!v.IsSequence() || v.size() < 2 || v.size() > 3) parse_fail(v.Mark(), key + " must be a list of 2 or 3 numbers");
  Vec3 out = Vec3::Zero();
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i], key);
  return out;
}

Word to_word(const YAML::Node& v, const std::string& key) {
  if (!v.IsSequence()) parse_fail(v.Mark(), key + " must be a list of centre labels");
  Word w;
  for (const auto& x : v) w.push_back(static_cast<int>(to_integer(x, key)));
  return w;
}

// Reads the keys of one mapping; anything left over is an unknown key.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) parse_fail(node_.Mark(), name() + " must be a mapping");
  }

  std::optional<YAML::Node> get(const char* key) {
    seen_.insert(key);
    if (!node_ || !node_.IsMap()) return std::nullopt;
    const YAML::Node v = node_[key];
    if (!v || v.IsNull()) return std::nullopt;
    return v;
  }
  std::string key(const char* k) const { return path_.empty() ? k : path_ + "." + k; }

  void read(const char* k, double& out) {
    if (auto v = get(k)) out = to_double(*v, key(k));
  }
  void read(const char* k, int& out) {
    if (auto v = get(k)) {
      const long long x = to_integer(*v, key(k));
      if (x < INT32_MIN || x > INT32_MAX) parse_fail(v->Mark(), key(k) + " out of range");
      out = static_cast<int>(x);
    }
  }
  void read(const char* k, long& out) {
    if (auto v = get(k)) out = static_cast<long>(to_integer(*v, key(k)));
  }
  void read(const char* k, std::uint64_t& out) {
    if (auto v = get(k)) {
      try {
        out = v->as<std::uint64_t>();
      } catch (const YAML::BadConversion&) {
        parse_fail(v->Mark(), key(k) + " must be a non-negative integer");
      }
    }
  }
  void read(const char* k, std::string& out) {
    if (auto v = get(k)) {
      if (!v->IsScalar()) parse_fail(v->Mark(), key(k) + " must be a string");
      out = v->Scalar();
    }
  }
  void read(const char* k, Vec3& out) {
    if (auto v = get(k)) out = to_vec(*v, key(k));
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    std::set<std::string> present;
    for (const auto& kv : node_) {
      const auto k = kv.first.Scalar();
      if (!seen_.count(k)) parse_fail(kv.first.Mark(), "unknown key '" + key(k.c_str()) + "'");
      if (!present.insert(k).second) parse_fail(kv.first.Mark(), "duplicate key '" + key(k.c_str()) + "'");
    }
  }

 private:
  std::string name() const { return path_.empty() ? "document" : path_; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_integrator(Section& s, IntegratorSettings& in) {
  s.read("step", in.step);
  s.read("energy_tol", in.energy_tol);
  s.read("order", in.order);
  s.read("max_steps", in.max_steps);
  s.finish();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    parse_fail(e.mark, e.msg);
  }
  RunConfig c;
  Section top(root, "");
  top.read("dimension", c.dimension);
  top.read("collision_guard", c.collision_guard);
  if (auto list = top.get("centres")) {
    if (!list->IsSequence()) parse_fail(list->Mark(), "centres must be a list");
    for (std::size_t k = 0; k < list->size(); ++k) {
      Section s((*list)[k], "centres[" + std::to_string(k) + "]");
      Centre ct;
      s.read("position", ct.position);
      s.read("charge", ct.charge);
      s.finish();
      c.centres.push_back(ct);
    }
  }
  top.read("energy", c.energy);
  {
    Section s(top.get("integrator").value_or(YAML::Node()), "integrator");
    read_integrator(s, c.integrator);
  }
  {
    Section s(top.get("scattering").value_or(YAML::Node()), "scattering");
    s.read("horizon", c.scattering.horizon);
    s.read("j_min", c.scattering.j_min);
    s.read("j_max", c.scattering.j_max);
    s.read("richardson_levels", c.scattering.richardson_levels);
    s.read("tau_tol", c.scattering.tau_tol);
    s.finish();
  }
  {
    Section s(top.get("gevrey").value_or(YAML::Node()), "gevrey");
    s.read("g", c.gevrey.g);
    s.read("C2", c.gevrey.C2);
    s.read("energy_min", c.gevrey.energy_min);
    s.read("energy_max", c.gevrey.energy_max);
    s.finish();
  }
  {
    Section s(top.get("batch").value_or(YAML::Node()), "batch");
    auto& b = c.batch;
    s.read("plane", b.plane);
    s.read("direction", b.direction);
    s.read("axis", b.axis);
    s.read("b_min", b.b_min);
    s.read("b_max", b.b_max);
    s.read("count", b.count);
    s.read("axis2", b.axis2);
    s.read("b2_min", b.b2_min);
    s.read("b2_max", b.b2_max);
    s.read("count2", b.count2);
    s.finish();
  }
  {
    Section s(top.get("symbolic").value_or(YAML::Node()), "symbolic");
    auto& y = c.symbolic;
    s.read("m_max", y.m_max);
    if (auto w = s.get("words")) {
      if (!w->IsSequence()) parse_fail(w->Mark(), "symbolic.words must be a list of words");
      for (const auto& x : *w) y.words.push_back(to_word(x, "symbolic.words"));
    }
    s.read("section_radius", y.shooting.section_radius);
    s.read("tol", y.shooting.tol);
    s.read("max_iterations", y.shooting.max_iterations);
    s.read("fd_step", y.shooting.fd_step);
    s.read("weak_contraction", y.shooting.weak_contraction);
    Section in(s.get("integrator").value_or(YAML::Node()), "symbolic.integrator");
    read_integrator(in, y.shooting.integrator);
    s.finish();
  }
  {
    Section s(top.get("check").value_or(YAML::Node()), "check");
    auto& k = c.check;
    s.read("points", k.points);
    s.read("orbit_time", k.orbit_time);
    s.read("energy_tol", k.energy_tol);
    s.read("roundtrip_tol", k.roundtrip_tol);
    s.read("kepler_tol", k.kepler_tol);
    s.read("momentum_tol", k.momentum_tol);
    s.read("tau_tol", k.tau_tol);
    s.read("spread_tol", k.spread_tol);
    s.read("bracket_tol", k.bracket_tol);
    s.read("rank_fraction", k.rank_fraction);
    s.finish();
  }
  {
    Section s(top.get("run").value_or(YAML::Node()), "run");
    s.read("jobs", c.run.jobs);
    s.read("seed", c.run.seed);
    s.read("out", c.run.out);
    s.finish();
  }
  top.finish();

  c.integrator.collision_guard = c.collision_guard;
  c.symbolic.shooting.integrator.collision_guard = c.collision_guard;
  c.scattering.integrator = c.integrator;
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

CentreConfig RunConfig::centre_config() const { return CentreConfig(dimension, centres, collision_guard); }

void RunConfig::validate() const {
  const auto cfg = centre_config();
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::ValidationError, what); };
  if (!(energy > 0.0) || !std::isfinite(energy)) fail("energy must be positive and finite");
  integrator.validate();
  scattering.validate();
  gevrey.validate();
  symbolic.shooting.validate();

  const auto planar = [&](const Vec3& v, const char* name) {
    if (dimension == 2 && v.z() != 0.0) fail(std::string(name) + " has a z component in a planar configuration");
  };
  const auto& b = batch;
  planar(b.direction, "batch.direction");
  planar(b.axis, "batch.axis");
  if (!(b.plane > 0.0)) fail("batch.plane must be positive");
  if (b.count < 1 || b.count2 < 1) fail("batch counts must be >= 1");
  if (!(b.b_max >= b.b_min) || !(b.b2_max >= b.b2_min)) fail("batch ranges must satisfy min <= max");
  if (!(b.direction.norm() > 0.0)) fail("batch.direction must be nonzero");
  if (!(b.axis.cross(b.direction).norm() > 1e-12 * b.axis.norm() * b.direction.norm()))
    fail("batch.axis must not be parallel to batch.direction");
  if (b.count2 > 1 || b.b2_min != 0.0 || b.b2_max != 0.0) {
    if (dimension == 2) fail("batch.axis2 needs a spatial configuration");
    if (!(b.axis2.cross(b.direction).norm() > 1e-12 * b.axis2.norm() * b.direction.norm()))
      fail("batch.axis2 must not be parallel to batch.direction");
  }

  if (symbolic.m_max < 2) fail("symbolic.m_max must be >= 2");
  for (const auto& w : symbolic.words)
    if (!admissible(w, static_cast<int>(centres.size()))) fail("symbolic word " + to_string(w) + " is not admissible");

  const auto& k = check;
  if (k.points < 1) fail("check.points must be >= 1");
  if (!(k.orbit_time > 0.0)) fail("check.orbit_time must be positive");
  for (double t : {k.energy_tol, k.roundtrip_tol, k.kepler_tol, k.momentum_tol, k.tau_tol, k.spread_tol, k.bracket_tol})
    if (!(t > 0.0)) fail("check tolerances must be positive");
  if (!(k.rank_fraction > 0.0 && k.rank_fraction <= 1.0)) fail("check.rank_fraction must lie in (0, 1]");
  if (run.jobs < 1) fail("run.jobs must be >= 1");
  (void)cfg;
}

namespace {

void emit_vec(YAML::Emitter& e, const Vec3& v, int d) {
  e << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i < d; ++i) e << format_double(v[i]);
  e << YAML::EndSeq;
}

void emit_integrator(YAML::Emitter& e, const IntegratorSettings& in) {
  e << YAML::BeginMap;
  e << YAML::Key << "step" << YAML::Value << format_double(in.step);
  e << YAML::Key << "energy_tol" << YAML::Value << format_double(in.energy_tol);
  e << YAML::Key << "order" << YAML::Value << in.order;
  e << YAML::Key << "max_steps" << YAML::Value << in.max_steps;
  e << YAML::EndMap;
}

}  // namespace

std::string dump_config(const RunConfig& c, bool include_run) {
  using YAML::Key, YAML::Value;
  const int d = c.dimension;
  const auto num = [](double v) { return format_double(v); };
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << Key << "dimension" << Value << c.dimension;
  e << Key << "collision_guard" << Value << num(c.collision_guard);
  e << Key << "centres" << Value << YAML::BeginSeq;
  for (const auto& ct : c.centres) {
    e << YAML::BeginMap << Key << "position" << Value;
    emit_vec(e, ct.position, d);
    e << Key << "charge" << Value << num(ct.charge) << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << Key << "energy" << Value << num(c.energy);
  e << Key << "integrator" << Value;
  emit_integrator(e, c.integrator);

  const auto& s = c.scattering;
  e << Key << "scattering" << Value << YAML::BeginMap;
  e << Key << "horizon" << Value << num(s.horizon);
  e << Key << "j_min" << Value << s.j_min;
  e << Key << "j_max" << Value << s.j_max;
  e << Key << "richardson_levels" << Value << s.richardson_levels;
  e << Key << "tau_tol" << Value << num(s.tau_tol);
  e << YAML::EndMap;

  e << Key << "gevrey" << Value << YAML::BeginMap;
  e << Key << "g" << Value << num(c.gevrey.g);
  e << Key << "C2" << Value << num(c.gevrey.C2);
  e << Key << "energy_min" << Value << num(c.gevrey.energy_min);
  e << Key << "energy_max" << Value << num(c.gevrey.energy_max);
  e << YAML::EndMap;

  const auto& b = c.batch;
  e << Key << "batch" << Value << YAML::BeginMap;
  e << Key << "plane" << Value << num(b.plane);
  e << Key << "direction" << Value;
  emit_vec(e, b.direction, d);
  e << Key << "axis" << Value;
  emit_vec(e, b.axis, d);
  e << Key << "b_min" << Value << num(b.b_min);
  e << Key << "b_max" << Value << num(b.b_max);
  e << Key << "count" << Value << b.count;
  if (d == 3) {
    e << Key << "axis2" << Value;
    emit_vec(e, b.axis2, d);
    e << Key << "b2_min" << Value << num(b.b2_min);
    e << Key << "b2_max" << Value << num(b.b2_max);
    e << Key << "count2" << Value << b.count2;
  }
  e << YAML::EndMap;

  const auto& y = c.symbolic;
  e << Key << "symbolic" << Value << YAML::BeginMap;
  e << Key << "m_max" << Value << y.m_max;
  e << Key << "words" << Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& w : y.words) {
    e << YAML::Flow << YAML::BeginSeq;
    for (int k : w) e << k;
    e << YAML::EndSeq;
  }
  e << YAML::EndSeq;
  e << Key << "section_radius" << Value << num(y.shooting.section_radius);
  e << Key << "tol" << Value << num(y.shooting.tol);
  e << Key << "max_iterations" << Value << y.shooting.max_iterations;
  e << Key << "fd_step" << Value << num(y.shooting.fd_step);
  e << Key << "weak_contraction" << Value << num(y.shooting.weak_contraction);
  e << Key << "integrator" << Value;
  emit_integrator(e, y.shooting.integrator);
  e << YAML::EndMap;

  const auto& k = c.check;
  e << Key << "check" << Value << YAML::BeginMap;
  e << Key << "points" << Value << k.points;
  e << Key << "orbit_time" << Value << num(k.orbit_time);
  e << Key << "energy_tol" << Value << num(k.energy_tol);
  e << Key << "roundtrip_tol" << Value << num(k.roundtrip_tol);
  e << Key << "kepler_tol" << Value << num(k.kepler_tol);
  e << Key << "momentum_tol" << Value << num(k.momentum_tol);
  e << Key << "tau_tol" << Value << num(k.tau_tol);
  e << Key << "spread_tol" << Value << num(k.spread_tol);
  e << Key << "bracket_tol" << Value << num(k.bracket_tol);
  e << Key << "rank_fraction" << Value << num(k.rank_fraction);
  e << YAML::EndMap;

  if (include_run) {
    e << Key << "run" << Value << YAML::BeginMap;
    e << Key << "jobs" << Value << c.run.jobs;
    e << Key << "seed" << Value << c.run.seed;
    e << Key << "out" << Value << c.run.out;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string config_hash(const RunConfig& c) { return sha256_hex(dump_config(c, false)); }

}  // namespace ncentre
