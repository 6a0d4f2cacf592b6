#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncentre/integrals.hpp"
#include "ncentre/symbolic.hpp"

namespace ncentre {

/// Launch grid: states on the plane at distance `plane` behind the origin,
/// moving along `direction`, offset by b * axis + b2 * axis2.
struct BatchSpec {
  double plane = 20.0;
  Vec3 direction = Vec3(1, 0, 0);
  Vec3 axis = Vec3(0, 1, 0);
  double b_min = -2.0;
  double b_max = 2.0;
  int count = 101;
  Vec3 axis2 = Vec3(0, 0, 1);
  double b2_min = 0.0;
  double b2_max = 0.0;
  int count2 = 1;
};

struct SymbolicSpec {
  int m_max = 4;
  std::vector<Word> words;  // empty: every cyclic class up to m_max
  ShootingSettings shooting;
};

/// Sizes and tolerances of the check battery.
struct CheckSpec {
  int points = 4;            // random states per check
  double orbit_time = 20.0;
  double energy_tol = 1e-8;
  double roundtrip_tol = 1e-8;
  double kepler_tol = 1e-9;
  double momentum_tol = 1e-8;
  double tau_tol = 1e-8;
  double spread_tol = 1e-6;
  double bracket_tol = 1e-4;
  double rank_fraction = 0.99;
};

/// Runtime knobs; kept out of the content hash so that outputs do not
/// depend on them.
struct RunSpec {
  int jobs = 1;
  std::uint64_t seed = 1;
  std::string out = "out";
};

struct RunConfig {
  int dimension = 3;
  double collision_guard = 1e-10;
  std::vector<Centre> centres;
  double energy = 1.0;
  IntegratorSettings integrator;
  ScatterSettings scattering;  // scattering.integrator mirrors `integrator`
  GevreyParams gevrey;
  BatchSpec batch;
  SymbolicSpec symbolic;
  CheckSpec check;
  RunSpec run;

  CentreConfig centre_config() const;
  /// Throws ValidationError naming the violated invariant.
  void validate() const;
};

/// YAML document to a validated RunConfig with defaults filled in. Throws
/// ParseError (with line and column) or ValidationError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Normalized YAML; every key present, floats with 17 significant digits.
std::string dump_config(const RunConfig& c, bool include_run = true);

/// SHA-256 (hex) of dump_config(c, false).
std::string config_hash(const RunConfig& c);

std::string sha256_hex(const std::string& data);

/// %.17g
std::string format_double(double v);

}  // namespace ncentre
