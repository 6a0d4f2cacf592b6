#pragma once

#include <string>
#include <vector>

#include "ncentre/flow.hpp"
#include "ncentre/kepler.hpp"

namespace ncentre {

/// TrappedForward: no escape in forward time (escapes backward).
/// TrappedBackward: escapes forward only.
enum class OrbitClass { Scattering, TrappedForward, TrappedBackward, BoundedToHorizon, CollisionFlagged };

std::string to_string(OrbitClass c);

struct Classification {
  OrbitClass kind = OrbitClass::BoundedToHorizon;
  double horizon = 0.0;
  double t_plus = 0.0;   // escape time forward (valid if escaped forward)
  double t_minus = 0.0;  // escape time backward, <= 0
  bool escaped_forward = false;
  bool escaped_backward = false;
};

struct ScatterSettings {
  IntegratorSettings integrator;
  double horizon = 1e3;
  int j_min = 5;              // radii R_vir * 2^j, j = j_min..j_max
  int j_max = 13;
  int richardson_levels = 3;
  double tau_tol = 1e-6;      // absolute, scaled by max(1, |tau|)

  void validate() const;
};

/// Comparison Kepler orbit about the origin with the total charge.
struct MoellerDatum {
  int direction = +1;  // +1 outgoing, -1 incoming
  double charge = 0.0;
  double energy = 0.0;  // far-field osculating energy, extrapolated in 1/R
  Vec3 angular_momentum = Vec3::Zero();
  Vec3 runge_lenz = Vec3::Zero();
  std::vector<double> radii;
  std::vector<double> residuals;  // relative element change between consecutive radii

  KeplerElements elements() const;
};

/// Everything the scattering module derives from one orbit.
struct ScatterData {
  Classification classification;
  double energy = 0.0;
  MoellerDatum outgoing, incoming;
  Vec3 p_plus = Vec3::Zero();
  Vec3 p_minus = Vec3::Zero();
  double tau = 0.0;
  double tau_err = 0.0;
  std::vector<double> radii;
  std::vector<double> tau_ladder;  // tau_R at each radius
  bool ladder_monotone = false;    // |tau_{j+1} - tau_j| non-increasing above the noise floor
  bool converged = false;
  std::string failure;  // set when !converged
};

Classification classify(const CentreConfig& cfg, const PhaseState& x, const ScatterSettings& settings = {});

/// Full scattering analysis of x. Throws NotScattering for non-scattering
/// states; convergence failures are reported in the result.
ScatterData scatter(const CentreConfig& cfg, const PhaseState& x, const ScatterSettings& settings = {});

/// As scatter, but a non-scattering state comes back with its classification
/// only (converged = false).
ScatterData analyse(const CentreConfig& cfg, const PhaseState& x, const ScatterSettings& settings = {});

/// Throws NoConvergence if the element residuals do not contract.
MoellerDatum moeller_datum(const CentreConfig& cfg, const PhaseState& x, int direction,
                           const ScatterSettings& settings = {});

Vec3 asymptotic_momentum(const CentreConfig& cfg, const PhaseState& x, int direction,
                         const ScatterSettings& settings = {});

struct TimeDelay {
  double value = 0.0;
  double error = 0.0;
  std::vector<double> radii;
  std::vector<double> ladder;
};

/// Throws NoConvergence when the extrapolated delay misses tau_tol.
TimeDelay time_delay(const CentreConfig& cfg, const PhaseState& x, const ScatterSettings& settings = {});

struct Extrapolation {
  double value = 0.0;
  double error = 0.0;
};

/// Richardson extrapolation of values sampled at radii growing by factor 2,
/// model X(R) = X_inf + a/R + b/R^2 + ...
Extrapolation richardson(const std::vector<double>& values, int levels);

}  // namespace ncentre
