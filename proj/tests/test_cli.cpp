#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "ncentre/cli.hpp"

using namespace ncentre;

namespace {

const char* kMinimal = R"(
centres:
  - {position: [1, 0, 0], charge: 1}
  - {position: [-0.5, 0.8, 0.1], charge: 1}
  - {position: [-0.4, -0.9, -0.2], charge: 1}
energy: 10
)";

ErrorCode code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error for:\n" << text);
  return ErrorCode::ParseError;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

template <class Rows, class Writer>
std::string csv(const RunConfig& c, const Rows& rows, Writer w) {
  std::ostringstream out;
  w(out, c, rows);
  return out.str();
}

}  // namespace

TEST_CASE("config parsing and normalization") {
  const auto c = parse_config(kMinimal);
  CHECK(c.dimension == 3);
  CHECK(c.centres.size() == 3);
  CHECK(c.energy == 10.0);
  CHECK(c.gevrey.g == 2.0);
  CHECK(c.scattering.integrator.step == c.integrator.step);

  const std::string once = dump_config(c);
  const std::string twice = dump_config(parse_config(once));
  CHECK(once == twice);
  CHECK(config_hash(c) == config_hash(parse_config(once)));
  CHECK(config_hash(c).size() == 64);

  // Runtime knobs do not move the hash; physics does.
  auto r = c;
  r.run.jobs = 8;
  r.run.out = "elsewhere";
  CHECK(config_hash(r) == config_hash(c));
  r.energy = 10.5;
  CHECK(config_hash(r) != config_hash(c));

  // Non-representable decimals survive the round trip bit for bit.
  const auto odd = parse_config(std::string(kMinimal) + "integrator: {step: 0.1, energy_tol: 3.3e-9}\n");
  CHECK(parse_config(dump_config(odd)).integrator.step == 0.1);
  CHECK(parse_config(dump_config(odd)).integrator.energy_tol == 3.3e-9);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config errors") {
  CHECK(code_of("centres: [\n  - {position: [0, 0]\n") == ErrorCode::ParseError);
  CHECK(message_of("centres: [\n  - {position: [0, 0]\n").find("line ") != std::string::npos);

  const std::string bad_number = std::string(kMinimal) + "gevrey:\n  g: two\n";
  CHECK(code_of(bad_number) == ErrorCode::ParseError);
  CHECK(message_of(bad_number).find("line 8, column 6") != std::string::npos);

  CHECK(code_of(std::string(kMinimal) + "integrater: {step: 1}\n") == ErrorCode::ParseError);
  CHECK(message_of(std::string(kMinimal) + "batch: {cout: 3}\n").find("batch.cout") != std::string::npos);

  CHECK(code_of(std::string(kMinimal) + "gevrey: {g: 1}\n") == ErrorCode::ValidationError);
  CHECK(message_of(std::string(kMinimal) + "gevrey: {g: 1}\n").find("must exceed 1") != std::string::npos);

  const char* twins = "centres:\n  - {position: [1, 0, 0]}\n  - {position: [1, 0, 0]}\n";
  CHECK(code_of(twins) == ErrorCode::ValidationError);
  CHECK(message_of(twins).find("coincident centres") != std::string::npos);
  CHECK(message_of("centres:\n  - {position: [1, 0, 0], charge: 0}\n").find("zero charge") != std::string::npos);
  CHECK(code_of("energy: 1\n") == ErrorCode::ValidationError);  // no centres
  CHECK(code_of(std::string(kMinimal) + "energy: -1\n") == ErrorCode::ParseError);  // duplicate key
  CHECK(code_of(std::string(kMinimal) + "symbolic: {words: [[1, 1]]}\n") == ErrorCode::ValidationError);
  CHECK(code_of(std::string(kMinimal) + "batch: {axis: [1, 0, 0]}\n") == ErrorCode::ValidationError);
  CHECK(code_of(std::string(kMinimal) + "run: {jobs: 0}\n") == ErrorCode::ValidationError);
}

TEST_CASE("one-centre scatter batch") {
  auto c = parse_config("centres:\n  - {position: [0, 0, 0], charge: 1}\nenergy: 2\nbatch: {b_min: 0.5, b_max: 3, count: 6}\n");
  const auto rows = run_scatter_batch(c, 1);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    CHECK(r.analysed);
    CHECK(r.kind == OrbitClass::Scattering);
    CHECK(std::abs(r.tau) < 1e-7);
    CHECK(r.flags.empty());
  }
  const auto text = csv(c, rows, write_scatter_csv);
  CHECK(text.find("id,q0_x,q0_y,q0_z,p0_x,p0_y,p0_z,E,class,tau,tau_err,pplus_x") != std::string::npos);
  CHECK(text.find(",f1,f2,logf1,logf2,flags\n") != std::string::npos);
  CHECK(text.find("# config_sha256: " + config_hash(c)) == text.find("# config_sha256"));
}

TEST_CASE("bad rows are flagged, not fatal") {
  auto c = parse_config(
      "centres:\n  - {position: [-1, 0, 0], charge: 1}\n  - {position: [1, 0, 0], charge: 1}\n"
      "energy: 1\nbatch: {b_min: 0, b_max: 1, count: 3}\ngevrey: {energy_max: 0.5}\n"
      "scattering: {horizon: 200}\n");
  const auto rows = run_scatter_batch(c, 2);
  REQUIRE(rows.size() == 3);
  int flagged = 0;
  for (const auto& r : rows)
    if (r.kind == OrbitClass::Scattering && r.analysed) {
      ++flagged;
      CHECK_FALSE(r.gevrey);
      CHECK(std::find(r.flags.begin(), r.flags.end(), "outside_energy_window") != r.flags.end());
    }
  CHECK(flagged > 0);
  // A launch point inside a centre's guard is an error row.
  c.batch.b_min = c.batch.b_max = 0.0;
  c.batch.plane = 1.0;
  c.batch.count = 1;
  const auto hit = run_scatter_batch(c, 1);
  REQUIRE(hit.size() == 1);
  CHECK_FALSE(hit[0].classified);
  CHECK(hit[0].flags == std::vector<std::string>{"error:CollisionPoint"});
}

TEST_CASE("determinism across worker counts") {
  auto c = parse_config(std::string(kMinimal) + "batch: {b_min: -1.5, b_max: 1.5, count: 9}\n");
  c.energy = 1.5;
  const auto one = csv(c, run_scatter_batch(c, 1), write_scatter_csv);
  const auto eight = csv(c, run_scatter_batch(c, 8), write_scatter_csv);
  CHECK(one == eight);
  CHECK(csv(c, run_classify_batch(c, 1), write_classify_csv) == csv(c, run_classify_batch(c, 3), write_classify_csv));
}

TEST_CASE("orbit atlas") {
  SUBCASE("two centres, single class, repeatable") {
    const auto c = parse_config("dimension: 2\ncentres:\n  - {position: [-1, 0]}\n  - {position: [1, 0]}\nenergy: 10\n");
    const auto a = run_orbit_atlas(c, 1);
    CHECK(a.enumerated);
    CHECK(a.complete());
    REQUIRE(a.report.orbits.size() == 1);
    CHECK(a.report.orbits[0].word == Word{1, 2});
    std::ostringstream x, y;
    write_atlas_json(x, c, a);
    write_atlas_json(y, c, run_orbit_atlas(c, 2));
    CHECK(x.str() == y.str());
    CHECK(x.str().find("\"section_states\"") != std::string::npos);
    CHECK(x.str().find("\"multipliers\"") != std::string::npos);
  }
  SUBCASE("three centres up to length 3") {
    const auto c = parse_config(
        "dimension: 2\ncentres:\n  - {position: [0, 0]}\n  - {position: [2, 0]}\n  - {position: [0.8, 1.7]}\n"
        "energy: 10\nsymbolic: {m_max: 3}\n");
    const auto a = run_orbit_atlas(c, 2);
    CHECK(a.complete());
    CHECK(a.report.orbits.size() == 5);
    REQUIRE(a.report.rows.size() == 2);
    CHECK(a.report.rows[0].attempted == 3);
    CHECK(a.report.rows[1].attempted == 2);
    std::ostringstream t;
    write_entropy_csv(t, c, a.report);
    CHECK(t.str().find("2,3,3,6,6,") != std::string::npos);
    CHECK(t.str().find("3,2,2,6,6,") != std::string::npos);
  }
  SUBCASE("explicit words and a failure") {
    const auto c = parse_config(
        "dimension: 2\ncentres:\n  - {position: [0, 0]}\n  - {position: [2, 0]}\n  - {position: [0.8, 1.7]}\n"
        "energy: 10\nsymbolic: {words: [[1, 2], [1, 2, 3]], max_iterations: 1, tol: 1e-14}\n");
    const auto a = run_orbit_atlas(c, 1);
    CHECK_FALSE(a.enumerated);
    CHECK_FALSE(a.complete());
    CHECK(a.report.failures.size() + a.report.orbits.size() == 2);
  }
}

TEST_CASE("check suite") {
  auto c = parse_config(kMinimal);
  c.energy = 1.5;
  c.check.points = 3;
  c.run.seed = 7;
  const auto rep = run_check_suite(c, 1);
  for (const char* name : {"kepler_oracle", "escape_bound", "kepler_time_delay", "energy_drift", "reversibility",
                           "asymptotic_momentum", "ladder_contraction", "gevrey_conservation", "bracket_f0_fk",
                           "jacobian_rank"}) {
    const auto* k = rep.find(name);
    REQUIRE_MESSAGE(k, name);
    CHECK_MESSAGE(k->passed, name << " measured " << k->measured);
  }
  // {f_1, f_2} is reported with its tolerance whatever the outcome.
  const auto* b = rep.find("bracket_f1_f2");
  REQUIRE(b);
  CHECK(b->tolerance == c.check.bracket_tol);
  CHECK(b->measured > 0.0);
  std::ostringstream j;
  write_check_json(j, c, rep);
  CHECK(j.str().find("\"bracket_f1_f2\"") != std::string::npos);
  CHECK(j.str().find("\"seed\": 7") != std::string::npos);

  SUBCASE("coarse integrator fails the drift check by name") {
    c.integrator.step = 0.05;
    c.integrator.energy_tol = 1e-3;
    c.scattering.integrator = c.integrator;
    const auto bad = run_check_suite(c, 1);
    CHECK_FALSE(bad.passed());
    REQUIRE(bad.find("energy_drift"));
    CHECK_FALSE(bad.find("energy_drift")->passed);
  }
}
