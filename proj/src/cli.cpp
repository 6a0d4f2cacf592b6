#include "ncentre/cli.hpp"

#include <Eigen/SVD>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <thread>

namespace ncentre {

using nlohmann::json;

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex m;
  const auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!first) first = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t extra = std::min<std::size_t>(std::max(1, jobs), std::max<std::size_t>(n, 1)) - 1;
  for (std::size_t j = 0; j < extra; ++j) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

std::string clean(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == ';' || ch == '\n' || ch == '\r' || ch == '"') ch = ' ';
  return s;
}

std::string error_flag(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return "error:" + std::string(to_string(err->code()));
  return "error:" + clean(e.what());
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + v[i];
  return out;
}

const char* axis_name(int i) { return i == 0 ? "x" : i == 1 ? "y" : "z"; }

void header(std::ostream& out, const RunConfig& c, const char* kind) {
  out << "# ncentre " << kind << "\n# config_sha256: " << config_hash(c) << "\n";
}

void vec_columns(std::ostream& out, const char* prefix, int d) {
  for (int i = 0; i < d; ++i) out << ',' << prefix << '_' << axis_name(i);
}

void vec_values(std::ostream& out, const Vec3& v, int d) {
  for (int i = 0; i < d; ++i) out << ',' << num(v[i]);
}

json vec_json(const Vec3& v, int d) {
  json a = json::array();
  for (int i = 0; i < d; ++i) a.push_back(v[i]);
  return a;
}

json provenance(const RunConfig& c, const char* kind) {
  return {{"kind", kind}, {"config_sha256", config_hash(c)}, {"config", dump_config(c, false)}};
}

bool in_window(const GevreyParams& g, double H) { return H > g.energy_min && H <= g.energy_max; }

}  // namespace

Vec3 launch_position(const RunConfig& c, double b, double b2) {
  const Vec3 dir = c.batch.direction.normalized();
  const Vec3 e1 = (c.batch.axis - c.batch.axis.dot(dir) * dir).normalized();
  Vec3 e2 = c.batch.axis2 - c.batch.axis2.dot(dir) * dir;
  e2 -= e2.dot(e1) * e1;
  return -c.batch.plane * dir + b * e1 + (b2 != 0.0 ? Vec3(b2 * e2.normalized()) : Vec3::Zero());
}

PhaseState launch_state(const RunConfig& c, const CentreConfig& cfg, double b, double b2) {
  const Vec3 q = launch_position(c, b, b2);
  const double T = c.energy - potential(cfg, q);
  if (!(T > 0.0)) throw Error(ErrorCode::ValidationError, "launch point is energetically forbidden");
  return {q, std::sqrt(2.0 * T) * c.batch.direction.normalized(), 0.0};
}

std::vector<std::pair<double, double>> batch_grid(const RunConfig& c) {
  const auto& b = c.batch;
  const auto at = [](double lo, double hi, int n, int i) { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); };
  std::vector<std::pair<double, double>> out;
  for (int j = 0; j < b.count2; ++j)
    for (int i = 0; i < b.count; ++i) out.emplace_back(at(b.b_min, b.b_max, b.count, i), at(b.b2_min, b.b2_max, b.count2, j));
  return out;
}

namespace {

// Row i of the grid; a failed launch keeps the position with zero momentum.
PhaseState row_state(const RunConfig& c, const CentreConfig& cfg, const std::pair<double, double>& bb,
                     std::string& error) {
  try {
    return launch_state(c, cfg, bb.first, bb.second);
  } catch (const std::exception& e) {
    error = error_flag(e);
    return {launch_position(c, bb.first, bb.second), Vec3::Zero(), 0.0};
  }
}

}  // namespace

// --- scatter -----------------------------------------------------------------

ScatterRecord scatter_record(const RunConfig& c, const CentreConfig& cfg, int id, const PhaseState& x) {
  ScatterRecord r;
  r.id = id;
  r.x = x;
  try {
    r.energy = energy(cfg, x);
    const auto s = analyse(cfg, x, c.scattering);
    r.classified = true;
    r.kind = s.classification.kind;
    if (r.kind == OrbitClass::BoundedToHorizon) r.flags.push_back("ambiguous");
    if (r.kind == OrbitClass::Scattering && !s.converged) {
      r.flags.push_back("no_convergence");
      return r;
    }
    if (r.kind == OrbitClass::Scattering) {
      r.analysed = true;
      r.tau = s.tau;
      r.tau_err = s.tau_err;
      r.p_plus = s.p_plus;
      r.p_minus = s.p_minus;
      if (!s.ladder_monotone) r.flags.push_back("ladder_nonmonotone");
    }
    if (!in_window(c.gevrey, r.energy)) {
      r.flags.push_back("outside_energy_window");
      return r;
    }
    const auto g = gevrey_from_scatter(s, r.energy, cfg.dimension(), c.gevrey);
    r.gevrey = true;
    r.f.assign(g.value.begin() + 1, g.value.end());
    r.log_f.assign(g.log_abs.begin() + 1, g.log_abs.end());
  } catch (const std::exception& e) {
    r.flags.push_back(error_flag(e));
  }
  return r;
}

std::vector<ScatterRecord> run_scatter_batch(const RunConfig& c, int jobs) {
  const auto cfg = c.centre_config();
  const auto grid = batch_grid(c);
  std::vector<ScatterRecord> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    std::string error;
    const auto x = row_state(c, cfg, grid[i], error);
    if (error.empty()) {
      rows[i] = scatter_record(c, cfg, static_cast<int>(i), x);
    } else {
      rows[i].id = static_cast<int>(i);
      rows[i].x = x;
      rows[i].flags.push_back(error);
    }
  });
  return rows;
}

void write_scatter_csv(std::ostream& out, const RunConfig& c, const std::vector<ScatterRecord>& rows) {
  const int d = c.dimension;
  header(out, c, "scatter");
  out << "id";
  vec_columns(out, "q0", d);
  vec_columns(out, "p0", d);
  out << ",E,class,tau,tau_err";
  vec_columns(out, "pplus", d);
  vec_columns(out, "pminus", d);
  out << ",f1,f2,logf1,logf2,flags\n";
  for (const auto& r : rows) {
    out << r.id;
    vec_values(out, r.x.q, d);
    vec_values(out, r.x.p, d);
    out << ',' << num(r.energy) << ',' << (r.classified ? to_string(r.kind) : "");
    if (r.analysed) {
      out << ',' << num(r.tau) << ',' << num(r.tau_err);
      vec_values(out, r.p_plus, d);
      vec_values(out, r.p_minus, d);
    } else {
      out << ",,";
      for (int i = 0; i < 2 * d; ++i) out << ',';
    }
    for (int part = 0; part < 2; ++part)
      for (int k = 0; k < 2; ++k) {
        out << ',';
        const auto& v = part == 0 ? r.f : r.log_f;
        if (r.gevrey && k < static_cast<int>(v.size())) out << num(v[k]);
      }
    out << ',' << join(r.flags) << '\n';
  }
}

// --- classify ----------------------------------------------------------------

std::vector<ClassRecord> run_classify_batch(const RunConfig& c, int jobs) {
  const auto cfg = c.centre_config();
  const auto grid = batch_grid(c);
  std::vector<ClassRecord> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    auto& r = rows[i];
    r.id = static_cast<int>(i);
    r.x = row_state(c, cfg, grid[i], r.error);
    if (!r.error.empty()) return;
    try {
      r.energy = energy(cfg, r.x);
      r.c = classify(cfg, r.x, c.scattering);
    } catch (const std::exception& e) {
      r.error = error_flag(e);
    }
  });
  return rows;
}

void write_classify_csv(std::ostream& out, const RunConfig& c, const std::vector<ClassRecord>& rows) {
  const int d = c.dimension;
  header(out, c, "classify");
  out << "id";
  vec_columns(out, "q0", d);
  vec_columns(out, "p0", d);
  out << ",E,class,t_plus,t_minus,flags\n";
  for (const auto& r : rows) {
    out << r.id;
    vec_values(out, r.x.q, d);
    vec_values(out, r.x.p, d);
    out << ',' << num(r.energy);
    if (r.error.empty()) {
      out << ',' << to_string(r.c.kind) << ',';
      if (r.c.escaped_forward) out << num(r.c.t_plus);
      out << ',';
      if (r.c.escaped_backward) out << num(r.c.t_minus);
      out << ',' << (r.c.kind == OrbitClass::BoundedToHorizon ? "ambiguous" : "") << '\n';
    } else {
      out << ",,,," << r.error << '\n';
    }
  }
}

// --- integrals ---------------------------------------------------------------

namespace {

std::vector<std::pair<int, int>> bracket_pairs(int d) {
  std::vector<std::pair<int, int>> p;
  for (int k = 1; k < d; ++k) p.emplace_back(0, k);
  if (d == 3) p.emplace_back(1, 2);
  return p;
}

// Brackets and rank from one stencil Jacobian of (f_0, .., f_{d-1}).
void stencil_data(IntegralRecord& r, const RunConfig& c, const CentreConfig& cfg) {
  const int d = cfg.dimension();
  const auto F = gevrey_functional(cfg, c.gevrey, c.scattering);
  const auto jac = stencil_jacobian(F, r.x, d);
  r.pairs = bracket_pairs(d);
  for (const auto& [a, b] : r.pairs) r.brackets.push_back(bracket_from_jacobian(jac, a, b));
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(jac.J).singularValues();
  r.sigma_min = sv(sv.size() - 1);
  r.noise_floor = Eigen::JacobiSVD<Eigen::MatrixXd>(jac.noise).singularValues()(0);
  r.full_rank = r.sigma_min > RankReport{}.margin * r.noise_floor;
  r.brackets_valid = true;
}

}  // namespace

std::vector<IntegralRecord> run_integrals_batch(const RunConfig& c, int jobs) {
  const auto cfg = c.centre_config();
  const auto grid = batch_grid(c);
  std::vector<IntegralRecord> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    auto& r = rows[i];
    r.id = static_cast<int>(i);
    std::string error;
    r.x = row_state(c, cfg, grid[i], error);
    if (!error.empty()) {
      r.flags.push_back(error);
      return;
    }
    try {
      r.values = gevrey_integrals(cfg, r.x, c.gevrey, c.scattering);
      if (r.values.ambiguous) r.flags.push_back("ambiguous");
      if (r.values.kind == OrbitClass::Scattering) stencil_data(r, c, cfg);
    } catch (const std::exception& e) {
      r.flags.push_back(error_flag(e));
    }
  });
  return rows;
}

void write_integrals_csv(std::ostream& out, const RunConfig& c, const std::vector<IntegralRecord>& rows) {
  const int d = c.dimension;
  const auto pairs = bracket_pairs(d);
  header(out, c, "integrals");
  out << "id";
  vec_columns(out, "q0", d);
  vec_columns(out, "p0", d);
  out << ",class,tau";
  for (int k = 0; k < d; ++k) out << ",f" << k;
  for (int k = 1; k < d; ++k) out << ",logf" << k;
  for (const auto& [a, b] : pairs) out << ",bracket_" << a << b;
  out << ",sigma_min,noise_floor,full_rank,flags\n";
  for (const auto& r : rows) {
    out << r.id;
    vec_values(out, r.x.q, d);
    vec_values(out, r.x.p, d);
    const bool ok = r.values.value.size() == static_cast<std::size_t>(d);
    out << ',' << (ok ? to_string(r.values.kind) : "") << ',';
    if (ok && r.values.kind == OrbitClass::Scattering) out << num(r.values.tau);
    for (int k = 0; k < d; ++k) out << ',' << (ok ? num(r.values.value[k]) : "");
    for (int k = 1; k < d; ++k) out << ',' << (ok ? num(r.values.log_abs[k]) : "");
    for (std::size_t p = 0; p < pairs.size(); ++p) out << ',' << (r.brackets_valid ? num(r.brackets[p].relative()) : "");
    if (r.brackets_valid) out << ',' << num(r.sigma_min) << ',' << num(r.noise_floor) << ',' << (r.full_rank ? 1 : 0);
    else out << ",,,";
    out << ',' << join(r.flags) << '\n';
  }
}

// --- orbits and entropy ------------------------------------------------------

AtlasResult run_orbit_atlas(const RunConfig& c, int jobs) {
  const auto cfg = c.centre_config();
  AtlasResult a;
  if (c.symbolic.words.empty()) {
    a.enumerated = true;
    a.report = entropy_estimate(cfg, c.energy, c.symbolic.m_max, c.symbolic.shooting, jobs);
    return a;
  }
  const auto& words = c.symbolic.words;
  std::vector<std::optional<PeriodicOrbit>> found(words.size());
  std::vector<std::string> errors(words.size());
  parallel_for(words.size(), jobs, [&](std::size_t i) {
    try {
      found[i] = find_periodic_orbit(cfg, words[i], c.energy, c.symbolic.shooting);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  a.report.energy = c.energy;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (found[i]) a.report.orbits.push_back(std::move(*found[i]));
    else a.report.failures.emplace_back(words[i], errors[i]);
  }
  return a;
}

namespace {

json orbit_json(const CentreConfig& cfg, const PeriodicOrbit& o) {
  const int d = cfg.dimension();
  const auto h = hyperbolicity_report(o);
  json states = json::array();
  for (const auto& x : o.section_states)
    states.push_back({{"centre", nearest_centre(cfg, x.q) + 1}, {"t", x.t}, {"q", vec_json(x.q, d)}, {"p", vec_json(x.p, d)}});
  json crossings = json::array();
  for (const auto& z : o.crossings) crossings.push_back({{"centre", z.centre + 1}, {"theta", z.theta}, {"L", z.L}});
  json mult = json::array();
  for (const auto& m : o.multipliers) mult.push_back({m.real(), m.imag()});
  return {{"word", o.word},
          {"energy", o.energy},
          {"period", o.period},
          {"residual", o.residual},
          {"residual_trace", o.residual_trace},
          {"weak_contraction", o.weak_contraction},
          {"section_radius", o.section_radius},
          {"segment_times", o.segment_times},
          {"section_states", states},
          {"section_crossings", crossings},
          {"multipliers", mult},
          {"flow_multiplier", o.flow_multiplier},
          {"energy_multiplier", o.energy_multiplier},
          {"hyperbolicity",
           {{"lambda_max", h.lambda_max},
            {"lambda_min", h.lambda_min},
            {"pairing_error", h.pairing_error},
            {"unit_distances", h.unit_distances},
            {"expansion_per_bounce", h.expansion_per_bounce},
            {"hyperbolic", h.hyperbolic}}}};
}

json failures_json(const EntropyReport& r) {
  json f = json::array();
  for (const auto& [w, msg] : r.failures) f.push_back({{"word", w}, {"error", msg}});
  return f;
}

json entropy_body(const EntropyReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"m", row.m},
                    {"attempted", row.attempted},
                    {"realized", row.realized},
                    {"realized_words", row.realized_words},
                    {"admissible_words", row.admissible_words},
                    {"mean_bounce_time", row.mean_bounce_time}});
  return {{"energy", r.energy}, {"h_est", r.h_est}, {"complete", r.complete()}, {"rows", rows}};
}

}  // namespace

void write_atlas_json(std::ostream& out, const RunConfig& c, const AtlasResult& a) {
  const auto cfg = c.centre_config();
  json j = provenance(c, "orbit_atlas");
  j["energy"] = c.energy;
  j["complete"] = a.complete();
  json orbits = json::array();
  for (const auto& o : a.report.orbits) orbits.push_back(orbit_json(cfg, o));
  j["orbits"] = orbits;
  j["failures"] = failures_json(a.report);
  if (a.enumerated) j["entropy"] = entropy_body(a.report);
  out << j.dump(2) << '\n';
}

void write_entropy_json(std::ostream& out, const RunConfig& c, const EntropyReport& r) {
  json j = provenance(c, "entropy");
  j["m_max"] = c.symbolic.m_max;
  j.update(entropy_body(r));
  j["failures"] = failures_json(r);
  out << j.dump(2) << '\n';
}

void write_entropy_csv(std::ostream& out, const RunConfig& c, const EntropyReport& r) {
  header(out, c, "entropy");
  out << "m,attempted,realized,realized_words,admissible_words,mean_bounce_time,rate\n";
  for (const auto& row : r.rows) {
    const double rate = row.realized > 0 ? std::log(static_cast<double>(row.realized)) / (row.m * row.mean_bounce_time)
                                         : std::nan("");
    out << row.m << ',' << row.attempted << ',' << row.realized << ',' << row.realized_words << ','
        << row.admissible_words << ',' << num(row.mean_bounce_time) << ',' << num(rate) << '\n';
  }
}

// --- check suite -------------------------------------------------------------

bool CheckReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

const CheckResult* CheckReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

struct Sampler {
  std::mt19937_64 rng;
  int d;
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  Vec3 direction() {
    std::normal_distribution<double> n;
    Vec3 v = Vec3::Zero();
    while (!(v.norm() > 1e-3))
      for (int i = 0; i < d; ++i) v[i] = n(rng);
    return v.normalized();
  }
};

CheckResult upper(std::string name, double measured, double tol, int samples, std::string detail = {}) {
  return {std::move(name), measured < tol, measured, tol, samples, std::move(detail)};
}

// Scattering launch states drawn from the batch ranges, with their analyses.
struct Sample {
  PhaseState x;
  ScatterData s;
};

std::vector<Sample> scattering_samples(const RunConfig& c, const CentreConfig& cfg, Sampler& g, int want, int jobs) {
  std::vector<Sample> out;
  for (int attempts = 0; static_cast<int>(out.size()) < want && attempts < 20 * want;) {
    std::vector<PhaseState> xs;
    for (int i = 0; i < want; ++i, ++attempts) {
      const double b = g.uniform(c.batch.b_min, c.batch.b_max);
      const double b2 = c.batch.b2_max > c.batch.b2_min ? g.uniform(c.batch.b2_min, c.batch.b2_max) : c.batch.b2_min;
      try {
        xs.push_back(launch_state(c, cfg, b, b2));
      } catch (const Error&) {
      }
    }
    std::vector<std::optional<ScatterData>> s(xs.size());
    parallel_for(xs.size(), jobs, [&](std::size_t i) {
      try {
        auto a = analyse(cfg, xs[i], c.scattering);
        if (a.classification.kind == OrbitClass::Scattering && a.converged) s[i] = std::move(a);
      } catch (const Error&) {
      }
    });
    for (std::size_t i = 0; i < xs.size() && static_cast<int>(out.size()) < want; ++i)
      if (s[i]) out.push_back({xs[i], std::move(*s[i])});
  }
  return out;
}

CheckResult kepler_oracle(const RunConfig& c, Sampler& g) {
  const double Z = c.centre_config().total_charge() > 0.0 ? c.centre_config().total_charge() : 1.0;
  const CentreConfig one(c.dimension, {{Vec3::Zero(), Z}}, c.collision_guard);
  double worst = 0.0;
  int n = 0;
  for (double E : {0.5, 1.0, 10.0})
    for (int i = 0; i < c.check.points; ++i, ++n) {
      const Vec3 q = g.uniform(0.5, 3.0) * g.direction();
      const PhaseState x{q, std::sqrt(2.0 * (E + Z / q.norm())) * g.direction(), 0.0};
      const auto tr = integrate(one, x, 10.0, c.integrator);
      for (std::size_t k = 0; k < tr.samples.size(); k += 16) {
        const auto& y = tr.samples[k];
        const auto ref = kepler_propagate(Z, Vec3::Zero(), x, y.t - x.t);
        worst = std::max({worst, (y.q - ref.q).norm(), (y.p - ref.p).norm()});
      }
      const auto ref = kepler_propagate(Z, Vec3::Zero(), x, tr.back().t - x.t);
      worst = std::max({worst, (tr.back().q - ref.q).norm(), (tr.back().p - ref.p).norm()});
    }
  return upper("kepler_oracle", worst, c.check.kepler_tol, n, "max state error against closed-form propagation, t in [0,10]");
}

CheckResult escape_bound(const RunConfig& c, const CentreConfig& cfg, Sampler& g) {
  int tested = 0, violations = 0;
  while (tested < 10 * c.check.points) {
    const double E = c.energy;
    const double R = virial_radius(cfg, E);
    const Vec3 q = R * g.uniform(1.0, 2.0) * g.direction();
    const PhaseState x{q, std::sqrt(2.0 * (E - potential(cfg, q))) * g.direction(), 0.0};
    if (!escape_check(cfg, x, E)) continue;
    ++tested;
    const auto tr = integrate(cfg, x, 5.0, c.integrator);
    for (const auto& y : tr.samples)
      if (y.q.norm() < escape_lower_bound(q.norm(), E, y.t) * (1.0 - 1e-12) || !escape_check_radius(y, R)) ++violations;
  }
  CheckResult r{"escape_bound", violations == 0, static_cast<double>(violations), 0.0, tested,
                "samples below q0 sqrt(1 + (lambda t)^2) or inside the virial sphere"};
  return r;
}

CheckResult kepler_delay(const RunConfig& c, Sampler& g, int jobs) {
  const double Z = c.centre_config().total_charge() > 0.0 ? c.centre_config().total_charge() : 1.0;
  const CentreConfig one(c.dimension, {{Vec3::Zero(), Z}}, c.collision_guard);
  std::vector<PhaseState> xs;
  for (int i = 0; i < c.check.points; ++i) {
    const Vec3 u = g.direction(), v = g.direction();
    const Vec3 q = -10.0 * u + g.uniform(0.2, 2.0) * (v - v.dot(u) * u).normalized();
    xs.push_back({q, std::sqrt(2.0 * (c.energy + Z / q.norm())) * u, 0.0});
  }
  std::vector<double> tau(xs.size(), INFINITY);
  std::vector<std::string> notes(xs.size());
  parallel_for(xs.size(), jobs, [&](std::size_t i) {
    try {
      const auto s = scatter(one, xs[i], c.scattering);
      if (s.converged) tau[i] = std::abs(s.tau);
      else notes[i] = s.failure;
    } catch (const Error& e) {
      notes[i] = e.what();
    }
  });
  double worst = 0.0;
  std::string detail = "|tau| for one centre at the origin";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    worst = std::max(worst, tau[i]);
    if (!notes[i].empty() && detail.find(';') == std::string::npos) detail += "; first failure: " + notes[i];
  }
  return upper("kepler_time_delay", worst, c.check.tau_tol, static_cast<int>(xs.size()), detail);
}

}  // namespace

CheckReport run_check_suite(const RunConfig& c, int jobs) {
  const auto cfg = c.centre_config();
  const int d = c.dimension;
  CheckReport rep;
  rep.seed = c.run.seed;
  Sampler g{std::mt19937_64(c.run.seed), d};

  rep.checks.push_back(kepler_oracle(c, g));
  rep.checks.push_back(escape_bound(c, cfg, g));
  rep.checks.push_back(kepler_delay(c, g, jobs));

  const auto samples = scattering_samples(c, cfg, g, c.check.points, jobs);
  const int n = static_cast<int>(samples.size());
  if (n == 0) {
    rep.checks.push_back({"scattering_samples", false, 0.0, 1.0, 0, "no scattering state found in the batch ranges"});
    return rep;
  }

  // Conservation and reversibility along the scattering orbits.
  const double v = std::sqrt(2.0 * c.energy);
  const double duration = c.check.orbit_time + c.batch.plane / v;
  std::vector<double> drift(n), roundtrip(n), spread(n);
  std::vector<std::string> notes(n);
  std::vector<std::string> spread_notes(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const auto& x = samples[i].x;
    Trajectory fwd;
    try {
      fwd = integrate(cfg, x, duration, c.integrator);
      drift[i] = fwd.stats.max_energy_drift;
      const auto back = integrate(cfg, fwd.back(), -duration, c.integrator);
      roundtrip[i] = std::max((back.back().q - x.q).norm(), (back.back().p - x.p).norm());
    } catch (const std::exception& e) {
      drift[i] = roundtrip[i] = spread[i] = INFINITY;
      notes[i] = spread_notes[i] = e.what();
      return;
    }
    if (!in_window(c.gevrey, energy(cfg, x))) {
      spread_notes[i] = "outside energy window";
      return;
    }
    try {
      std::vector<GevreyValues> vals;
      for (int k = 0; k < 5; ++k) {
        const auto& y = fwd.samples[k * (fwd.samples.size() - 1) / 4];
        vals.push_back(gevrey_integrals(cfg, y, c.gevrey, c.scattering));
      }
      for (const auto& w : vals)
        for (int k = 1; k < d; ++k) {
          if (w.kind != OrbitClass::Scattering || w.sign[k] != vals[0].sign[k]) spread[i] = INFINITY;
          else spread[i] = std::max(spread[i], std::abs(w.log_abs[k] - vals[0].log_abs[k]));
        }
    } catch (const std::exception& e) {
      spread[i] = INFINITY;
      spread_notes[i] = e.what();
    }
  });
  const auto max_of = [](const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, x);
    return m;
  };
  const auto first = [](const std::vector<std::string>& v) {
    for (const auto& s : v)
      if (!s.empty()) return "; first failure: " + s;
    return std::string();
  };
  const std::string first_error = first(notes);
  rep.checks.push_back(upper("energy_drift", max_of(drift), c.check.energy_tol, n,
                             "max relative |H - H0| along each orbit" + first_error));
  rep.checks.push_back(
      upper("reversibility", max_of(roundtrip), c.check.roundtrip_tol, n, "forward-backward state error" + first_error));

  double pnorm = 0.0;
  int monotone = 0;
  for (const auto& s : samples) {
    for (const Vec3& p : {s.s.p_plus, s.s.p_minus}) pnorm = std::max(pnorm, std::abs(p.norm() / v - 1.0));
    monotone += s.s.ladder_monotone;
  }
  rep.checks.push_back(upper("asymptotic_momentum", pnorm, c.check.momentum_tol, n, "| |p+-| / sqrt(2E) - 1 |"));
  const double frac = static_cast<double>(monotone) / n;
  rep.checks.push_back({"ladder_contraction", frac >= 0.95, frac, 0.95, n, "fraction of monotone tau ladders (lower bound)"});
  rep.checks.push_back(upper("gevrey_conservation", max_of(spread), c.check.spread_tol, n,
                             "max |log|f_k(x_t)| - log|f_k(x_0)|| over 5 samples per orbit" + first(spread_notes)));

  // Brackets and rank at the same points.
  std::vector<IntegralRecord> recs(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    recs[i].x = samples[i].x;
    try {
      if (in_window(c.gevrey, energy(cfg, recs[i].x))) stencil_data(recs[i], c, cfg);
    } catch (const std::exception& e) {
      recs[i].flags.push_back(e.what());
    }
  });
  const auto pairs = bracket_pairs(d);
  double f0 = 0.0, f12 = 0.0;
  int full = 0, valid = 0;
  for (const auto& r : recs) {
    if (!r.brackets_valid) {
      f0 = f12 = INFINITY;
      continue;
    }
    ++valid;
    full += r.full_rank;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      double& slot = pairs[p].first == 0 ? f0 : f12;
      slot = std::max(slot, r.brackets[p].relative());
    }
  }
  rep.checks.push_back(upper("bracket_f0_fk", f0, c.check.bracket_tol, n, "max relative |{f_0, f_k}|"));
  if (d == 3) rep.checks.push_back(upper("bracket_f1_f2", f12, c.check.bracket_tol, n, "max relative |{f_1, f_2}|"));
  const double rank = valid ? static_cast<double>(full) / n : 0.0;
  rep.checks.push_back({"jacobian_rank", rank >= c.check.rank_fraction, rank, c.check.rank_fraction, n,
                        "fraction of points with sigma_min > 1e3 x stencil noise (lower bound)"});
  return rep;
}

void write_check_json(std::ostream& out, const RunConfig& c, const CheckReport& r) {
  json j = provenance(c, "check");
  j["seed"] = r.seed;
  j["passed"] = r.passed();
  json checks = json::array();
  for (const auto& k : r.checks)
    checks.push_back({{"name", k.name},
                      {"passed", k.passed},
                      {"measured", k.measured},
                      {"tolerance", k.tolerance},
                      {"samples", k.samples},
                      {"detail", k.detail}});
  j["checks"] = checks;
  out << j.dump(2) << '\n';
}

}  // namespace ncentre
