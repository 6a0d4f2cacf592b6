#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <vector>

#include "ncentre/scattering.hpp"

namespace ncentre {

struct GevreyParams {
  double g = 2.0;   // Gevrey index, > 1
  double C2 = 1.0;
  double energy_min = 0.0;  // energy window, exclusive below
  double energy_max = std::numeric_limits<double>::infinity();

  double C() const { return C2 / (g - 1.0); }
  void validate() const;
};

/// Components f_0 = H and f_k = p_k^+ exp(-exp(C <tau>)), k = 1..d-1.
/// log_abs carries log|f_k| so that values below the double range stay usable.
struct GevreyValues {
  OrbitClass kind = OrbitClass::Scattering;
  bool ambiguous = false;  // BoundedToHorizon: reported as 0, may be a slow scatterer
  double tau = 0.0;
  std::vector<double> value;
  std::vector<double> log_abs;
  std::vector<int> sign;
};

/// One scattering analysis, all components. Throws ValidationError when H(x)
/// lies outside the energy window.
GevreyValues gevrey_integrals(const CentreConfig& cfg, const PhaseState& x, const GevreyParams& params,
                              const ScatterSettings& settings = {});
/// Scattering components from an analysis already at hand; no window check.
GevreyValues gevrey_from_scatter(const ScatterData& s, double H, int dimension, const GevreyParams& params);
double gevrey_integral(const CentreConfig& cfg, const PhaseState& x, const GevreyParams& params, int k,
                       const ScatterSettings& settings = {});

/// Functional on phase space with several components. Evaluations that are
/// not defined at a stencil point throw Error(NotScattering).
using PhaseFunctional = std::function<Eigen::VectorXd(const PhaseState&)>;

/// (f_0, .., f_{d-1}) as a stencil functional; throws NotScattering off the
/// scattering set. Keeps a reference to cfg.
PhaseFunctional gevrey_functional(const CentreConfig& cfg, const GevreyParams& params,
                                  const ScatterSettings& settings = {});

/// (p^+_1, .., p^+_d, tau); same conventions as gevrey_functional.
PhaseFunctional asymptotic_functional(const CentreConfig& cfg, const ScatterSettings& settings = {});

struct StencilSettings {
  double step = 1e-5;       // relative to max(1, |q|) or max(1, |p|)
  double step_min = 1e-9;
  void validate() const;
};

/// Central-difference Jacobian with one Richardson level in the canonical
/// coordinates (q_1..q_d, p_1..p_d). `noise` holds |refined - half-step| per entry.
struct StencilJacobian {
  Eigen::MatrixXd J;
  Eigen::MatrixXd noise;
  double step = 0.0;  // relative step actually used
};

/// Throws StencilFailure when no step down to step_min keeps the stencil evaluable.
StencilJacobian stencil_jacobian(const PhaseFunctional& F, const PhaseState& x, int dimension,
                                 const StencilSettings& s = {});

struct BracketValue {
  double value = 0.0;
  double scale = 0.0;  // |grad Fa| |grad Fb|
  double relative() const { return scale > 0.0 ? std::abs(value) / scale : 0.0; }
};

BracketValue bracket_from_jacobian(const StencilJacobian& jac, int a, int b);

BracketValue poisson_bracket(const PhaseFunctional& Fa, const PhaseFunctional& Fb, const PhaseState& x,
                             int dimension, const StencilSettings& s = {});

struct BracketReport {
  std::vector<std::pair<int, int>> pairs;
  std::vector<PhaseState> points;
  std::vector<std::vector<BracketValue>> values;  // [point][pair]
  double step = 0.0;
  double max_relative() const;
};

/// Brackets {f_0, f_k} and {f_1, f_2} (d = 3) at each point.
BracketReport gevrey_brackets(const CentreConfig& cfg, const GevreyParams& params,
                              const std::vector<PhaseState>& points, const ScatterSettings& settings = {},
                              const StencilSettings& stencil = {});

struct RankReport {
  std::vector<Eigen::VectorXd> singular_values;
  std::vector<double> noise_floor;  // spectral norm of the stencil noise estimate
  std::vector<bool> full_rank;
  double margin = 1e3;              // full rank: sigma_min > margin * noise_floor
  double full_fraction() const;
};

/// Rank of the Jacobian of the selected Gevrey components at each point.
/// An empty component list means all of f_0..f_{d-1}.
RankReport independence_rank(const CentreConfig& cfg, const GevreyParams& params,
                             const std::vector<PhaseState>& points, std::vector<int> components = {},
                             const ScatterSettings& settings = {}, const StencilSettings& stencil = {});

/// Separation constant of the two-centre problem,
/// K = L_1 . L_2 + 2a e . (Z_1 (q - s_1)/|q - s_1| - Z_2 (q - s_2)/|q - s_2|),
/// with L_k = (q - s_k) x p, 2a = |s_2 - s_1| and e the unit vector from s_1 to s_2.
/// Throws NotTwoCentres.
double two_centre_constant(const CentreConfig& cfg, const PhaseState& x);

/// Angular momentum about the line through collinear centres. Throws
/// ValidationError when the centres do not lie on one line.
double axial_angular_momentum(const CentreConfig& cfg, const PhaseState& x);

}  // namespace ncentre
