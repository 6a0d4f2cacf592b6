#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "ncentre/flow.hpp"

namespace ncentre {

/// Cyclic word over the centre labels 1..n.
using Word = std::vector<int>;

/// k_{i+1 mod m} != k_i, letters in 1..n, m >= 2.
bool admissible(const Word& w, int n);
Word canonical_rotation(const Word& w);  // lexicographically smallest rotation
bool primitive(const Word& w);           // not a power of a shorter word
std::string to_string(const Word& w);

/// d(u, v) = sum_i 2^{-|i|} (1 - delta(u_i, v_i)) for periodic words, index 0
/// at the first letter; exact.
double symbol_metric(const Word& u, const Word& v);
/// Same sum over finite windows of equal odd length centred on index 0.
double symbol_metric_window(const Word& u, const Word& v);

/// trace(A^m) for the complete graph on n letters: (n-1)^m + (n-1)(-1)^m.
std::uint64_t count_periodic_words(int n, int m);

/// Canonical representatives of primitive admissible cyclic words of length m.
std::vector<Word> cyclic_classes(int n, int m);

/// One state per letter at the midpoint of the edge s_{k_i} -> s_{k_{i+1}},
/// moving along the edge with |p| = sqrt(2 (E - V)).
std::vector<PhaseState> polygon_guess(const CentreConfig& cfg, const Word& w, double E);

/// Outgoing crossing of the circle |q - s_k| = rho, in canonical polar
/// coordinates about s_k: position angle theta and angular momentum L.
struct SectionPoint {
  int centre = 0;  // 0-based
  double theta = 0.0;
  double L = 0.0;
};

struct ShootingSettings {
  IntegratorSettings integrator = {2.5e-4, 1e-11};
  double section_radius = 0.0;  // 0: a fifth of the smallest centre separation
  double tol = 1e-10;           // max-norm residual in (theta, L)
  int max_iterations = 40;
  double fd_step = 1e-6;
  double weak_contraction = 0.5;  // warn when the residual ratio stays above this

  void validate() const;
};

struct PeriodicOrbit {
  Word word;
  double energy = 0.0;
  double period = 0.0;
  double section_radius = 0.0;
  std::vector<SectionPoint> crossings;   // shooting unknowns, one per letter
  std::vector<double> segment_times;
  std::vector<PhaseState> section_states;  // pericentre passages, one per letter
  std::vector<std::complex<double>> multipliers;  // return map on the section, |.| descending
  double flow_multiplier = 0.0;    // monodromy on the flow direction
  double energy_multiplier = 0.0;  // monodromy on the energy covector
  double residual = 0.0;
  std::vector<double> residual_trace;
  bool weak_contraction = false;

  PhaseState initial_state(const CentreConfig& cfg) const;
};

/// Multiple shooting on the section maps, damped Newton with finite-difference
/// Jacobians. Throws Inadmissible, ValidationError (d = 3), NoConvergence and
/// WrongItinerary.
PeriodicOrbit find_periodic_orbit(const CentreConfig& cfg, const Word& w, double E,
                                  const ShootingSettings& settings = {});

/// Largest section-map mismatch along the orbit, recomputed with `integrator`.
double closure_residual(const CentreConfig& cfg, const PeriodicOrbit& orbit, const IntegratorSettings& integrator);

struct HyperbolicityReport {
  double lambda_max = 0.0;   // |.| of the expanding reduced multiplier
  double lambda_min = 0.0;
  double pairing_error = 0.0;  // | |lambda_max lambda_min| - 1 |
  std::vector<double> unit_distances;  // |mu - 1| for the flow and energy multipliers
  double expansion_per_bounce = 0.0;   // log|lambda_max| / m
  bool hyperbolic = false;             // |lambda_max| > 1.5
};

HyperbolicityReport hyperbolicity_report(const PeriodicOrbit& orbit);

struct EntropyRow {
  int m = 0;
  int attempted = 0;
  int realized = 0;
  std::uint64_t realized_words = 0;  // periodic words of length m carried by realized orbits
  std::uint64_t admissible_words = 0;
  double mean_bounce_time = 0.0;
};

struct EntropyReport {
  double energy = 0.0;
  double h_est = 0.0;
  std::vector<EntropyRow> rows;
  std::vector<PeriodicOrbit> orbits;
  std::vector<std::pair<Word, std::string>> failures;
  bool complete() const { return failures.empty(); }
};

/// h_est = max_m log N_m / (m T_m), N_m the realized classes of length m and
/// T_m their mean flight time per bounce. `jobs` workers search classes in parallel.
EntropyReport entropy_estimate(const CentreConfig& cfg, double E, int m_max, const ShootingSettings& settings = {},
                               int jobs = 1);

}  // namespace ncentre
