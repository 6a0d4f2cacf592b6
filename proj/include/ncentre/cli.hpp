#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ncentre/config.hpp"

namespace ncentre {

/// Runs f(0..n-1) on `jobs` threads; indices are handed out in order.
/// The first exception escaping f is rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

/// Launch state for impact parameters (b, b2) at the config energy.
PhaseState launch_state(const RunConfig& c, const CentreConfig& cfg, double b, double b2 = 0.0);
Vec3 launch_position(const RunConfig& c, double b, double b2 = 0.0);

/// Impact parameters of the batch grid, b2 outer and b inner; the index is the row id.
std::vector<std::pair<double, double>> batch_grid(const RunConfig& c);

struct ScatterRecord {
  int id = 0;
  PhaseState x;
  double energy = 0.0;
  bool classified = false;
  OrbitClass kind = OrbitClass::BoundedToHorizon;
  bool analysed = false;  // scattering data below are valid
  double tau = 0.0;
  double tau_err = 0.0;
  Vec3 p_plus = Vec3::Zero();
  Vec3 p_minus = Vec3::Zero();
  bool gevrey = false;  // f values below are valid
  std::vector<double> f;      // f_1 .. f_{d-1}
  std::vector<double> log_f;  // log |f_k|
  std::vector<std::string> flags;
};

/// Never throws for a bad row; failures land in `flags`.
ScatterRecord scatter_record(const RunConfig& c, const CentreConfig& cfg, int id, const PhaseState& x);
std::vector<ScatterRecord> run_scatter_batch(const RunConfig& c, int jobs);
void write_scatter_csv(std::ostream& out, const RunConfig& c, const std::vector<ScatterRecord>& rows);

struct ClassRecord {
  int id = 0;
  PhaseState x;
  double energy = 0.0;
  Classification c;
  std::string error;
};

std::vector<ClassRecord> run_classify_batch(const RunConfig& c, int jobs);
void write_classify_csv(std::ostream& out, const RunConfig& c, const std::vector<ClassRecord>& rows);

struct IntegralRecord {
  int id = 0;
  PhaseState x;
  GevreyValues values;
  bool brackets_valid = false;
  std::vector<std::pair<int, int>> pairs;
  std::vector<BracketValue> brackets;
  double sigma_min = 0.0;
  double noise_floor = 0.0;
  bool full_rank = false;
  std::vector<std::string> flags;
};

std::vector<IntegralRecord> run_integrals_batch(const RunConfig& c, int jobs);
void write_integrals_csv(std::ostream& out, const RunConfig& c, const std::vector<IntegralRecord>& rows);

/// Orbits for the configured words, or for every cyclic class up to m_max
/// (with the entropy table) when no words are given.
struct AtlasResult {
  bool enumerated = false;
  EntropyReport report;
  bool complete() const { return report.complete(); }
};

AtlasResult run_orbit_atlas(const RunConfig& c, int jobs);
void write_atlas_json(std::ostream& out, const RunConfig& c, const AtlasResult& atlas);
void write_entropy_json(std::ostream& out, const RunConfig& c, const EntropyReport& report);
void write_entropy_csv(std::ostream& out, const RunConfig& c, const EntropyReport& report);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  int samples = 0;
  std::string detail;
};

struct CheckReport {
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  bool passed() const;
  const CheckResult* find(const std::string& name) const;
};

/// Kepler oracle, energy drift, reversibility, escape bound, asymptotic
/// momenta, one-centre delay, ladder contraction, conservation of the Gevrey
/// components, brackets and rank. Points are drawn with run.seed.
CheckReport run_check_suite(const RunConfig& c, int jobs);
void write_check_json(std::ostream& out, const RunConfig& c, const CheckReport& report);

}  // namespace ncentre
