#include "ncentre/integrals.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ncentre {

void GevreyParams::validate() const {
  if (!(g > 1.0)) throw Error(ErrorCode::ValidationError, "Gevrey index g must exceed 1");
  if (!(C2 > 0.0)) throw Error(ErrorCode::ValidationError, "C2 must be positive");
  if (!(energy_min >= 0.0) || !(energy_max > energy_min))
    throw Error(ErrorCode::ValidationError, "energy window must satisfy 0 <= E_min < E_max");
}

GevreyValues gevrey_integrals(const CentreConfig& cfg, const PhaseState& x, const GevreyParams& params,
                              const ScatterSettings& settings) {
  params.validate();
  const double H = energy(cfg, x);
  if (!(H > params.energy_min && H <= params.energy_max))
    throw Error(ErrorCode::ValidationError, "energy outside the configured window");

  const ScatterData s = analyse(cfg, x, settings);
  if (s.classification.kind == OrbitClass::Scattering && !s.converged) throw Error(ErrorCode::NoConvergence, s.failure);
  return gevrey_from_scatter(s, H, cfg.dimension(), params);
}

GevreyValues gevrey_from_scatter(const ScatterData& s, double H, int d, const GevreyParams& params) {
  GevreyValues out;
  out.value.assign(d, 0.0);
  out.log_abs.assign(d, -std::numeric_limits<double>::infinity());
  out.sign.assign(d, 0);
  out.value[0] = H;
  out.log_abs[0] = std::log(std::abs(H));
  out.sign[0] = (H > 0) - (H < 0);
  out.kind = s.classification.kind;
  if (out.kind != OrbitClass::Scattering) {
    out.ambiguous = out.kind == OrbitClass::BoundedToHorizon;
    return out;
  }

  out.tau = s.tau;
  const double damping = std::exp(params.C() * std::sqrt(1.0 + s.tau * s.tau));
  for (int k = 1; k < d; ++k) {
    const double pk = s.p_plus[k - 1];
    out.sign[k] = (pk > 0) - (pk < 0);
    out.log_abs[k] = std::log(std::abs(pk)) - damping;
    out.value[k] = pk * std::exp(-damping);
  }
  return out;
}

double gevrey_integral(const CentreConfig& cfg, const PhaseState& x, const GevreyParams& params, int k,
                       const ScatterSettings& settings) {
  if (k < 0 || k >= cfg.dimension()) throw Error(ErrorCode::ValidationError, "component index out of range");
  return gevrey_integrals(cfg, x, params, settings).value[k];
}

void StencilSettings::validate() const {
  if (!(step > 0.0) || !(step_min > 0.0) || step_min > step)
    throw Error(ErrorCode::ValidationError, "stencil steps must satisfy 0 < step_min <= step");
}

namespace {

// Coordinate i of (q_1..q_d, p_1..p_d) moved by h.
PhaseState shifted(const PhaseState& x, int dimension, int i, double h) {
  PhaseState y = x;
  if (i < dimension) y.q[i] += h;
  else y.p[i - dimension] += h;
  return y;
}

Eigen::MatrixXd central(const PhaseFunctional& F, const PhaseState& x, int d, double rel,
                        const double scale[2]) {
  Eigen::MatrixXd D;
  for (int i = 0; i < 2 * d; ++i) {
    const double h = rel * scale[i >= d];
    const Eigen::VectorXd col = (F(shifted(x, d, i, h)) - F(shifted(x, d, i, -h))) / (2.0 * h);
    if (D.size() == 0) D.resize(col.size(), 2 * d);
    D.col(i) = col;
  }
  return D;
}

}  // namespace

StencilJacobian stencil_jacobian(const PhaseFunctional& F, const PhaseState& x, int dimension,
                                 const StencilSettings& s) {
  s.validate();
  const double scale[2] = {std::max(1.0, x.q.norm()), std::max(1.0, x.p.norm())};
  for (double rel = s.step; rel >= s.step_min; rel *= 0.5) {
    try {
      const Eigen::MatrixXd coarse = central(F, x, dimension, rel, scale);
      const Eigen::MatrixXd fine = central(F, x, dimension, 0.5 * rel, scale);
      StencilJacobian out;
      out.J = (4.0 * fine - coarse) / 3.0;
      out.noise = (out.J - fine).cwiseAbs();
      out.step = rel;
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotScattering) throw;
    }
  }
  throw Error(ErrorCode::StencilFailure, "stencil leaves the scattering set down to the minimal step");
}

BracketValue bracket_from_jacobian(const StencilJacobian& jac, int a, int b) {
  const int d = static_cast<int>(jac.J.cols()) / 2;
  const auto ga = jac.J.row(a), gb = jac.J.row(b);
  BracketValue v;
  for (int i = 0; i < d; ++i) v.value += ga(i) * gb(d + i) - ga(d + i) * gb(i);
  v.scale = ga.norm() * gb.norm();
  return v;
}

BracketValue poisson_bracket(const PhaseFunctional& Fa, const PhaseFunctional& Fb, const PhaseState& x,
                             int dimension, const StencilSettings& s) {
  const auto both = [&](const PhaseState& y) {
    Eigen::VectorXd v(2);
    v << Fa(y)(0), Fb(y)(0);
    return v;
  };
  return bracket_from_jacobian(stencil_jacobian(both, x, dimension, s), 0, 1);
}

PhaseFunctional gevrey_functional(const CentreConfig& cfg, const GevreyParams& params,
                                  const ScatterSettings& settings) {
  return [&cfg, params, settings](const PhaseState& y) {
    const auto g = gevrey_integrals(cfg, y, params, settings);
    if (g.kind != OrbitClass::Scattering) throw Error(ErrorCode::NotScattering, "stencil point " + to_string(g.kind));
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(g.value.data(), g.value.size()));
  };
}

PhaseFunctional asymptotic_functional(const CentreConfig& cfg, const ScatterSettings& settings) {
  return [&cfg, settings](const PhaseState& y) {
    const auto s = scatter(cfg, y, settings);
    if (!s.converged) throw Error(ErrorCode::NoConvergence, s.failure);
    const int d = cfg.dimension();
    Eigen::VectorXd v(d + 1);
    for (int k = 0; k < d; ++k) v(k) = s.p_plus[k];
    v(d) = s.tau;
    return v;
  };
}

double BracketReport::max_relative() const {
  double m = 0.0;
  for (const auto& row : values)
    for (const auto& v : row) m = std::max(m, v.relative());
  return m;
}

BracketReport gevrey_brackets(const CentreConfig& cfg, const GevreyParams& params,
                              const std::vector<PhaseState>& points, const ScatterSettings& settings,
                              const StencilSettings& stencil) {
  const int d = cfg.dimension();
  BracketReport r;
  for (int k = 1; k < d; ++k) r.pairs.emplace_back(0, k);
  if (d == 3) r.pairs.emplace_back(1, 2);
  r.points = points;
  const auto F = gevrey_functional(cfg, params, settings);
  for (const auto& x : points) {
    const auto jac = stencil_jacobian(F, x, d, stencil);
    r.step = std::max(r.step, jac.step);
    auto& row = r.values.emplace_back();
    for (const auto& [a, b] : r.pairs) row.push_back(bracket_from_jacobian(jac, a, b));
  }
  return r;
}

double RankReport::full_fraction() const {
  if (full_rank.empty()) return 0.0;
  double n = 0.0;
  for (bool f : full_rank) n += f;
  return n / full_rank.size();
}

RankReport independence_rank(const CentreConfig& cfg, const GevreyParams& params,
                             const std::vector<PhaseState>& points, std::vector<int> components,
                             const ScatterSettings& settings, const StencilSettings& stencil) {
  const int d = cfg.dimension();
  if (components.empty())
    for (int k = 0; k < d; ++k) components.push_back(k);
  for (int k : components)
    if (k < 0 || k >= d) throw Error(ErrorCode::ValidationError, "component index out of range");

  const auto all = gevrey_functional(cfg, params, settings);
  const auto F = [&](const PhaseState& y) {
    const Eigen::VectorXd v = all(y);
    Eigen::VectorXd out(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) out(i) = v(components[i]);
    return out;
  };
  RankReport r;
  for (const auto& x : points) {
    const auto jac = stencil_jacobian(F, x, d, stencil);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(jac.J).singularValues();
    const double floor = Eigen::JacobiSVD<Eigen::MatrixXd>(jac.noise).singularValues()(0);
    r.singular_values.push_back(sv);
    r.noise_floor.push_back(floor);
    r.full_rank.push_back(sv(sv.size() - 1) > r.margin * floor);
  }
  return r;
}

double two_centre_constant(const CentreConfig& cfg, const PhaseState& x) {
  if (cfg.size() != 2) throw Error(ErrorCode::NotTwoCentres, "configuration has " + std::to_string(cfg.size()) + " centres");
  const auto& c1 = cfg.centre(0);
  const auto& c2 = cfg.centre(1);
  const Vec3 u1 = x.q - c1.position, u2 = x.q - c2.position;
  const Vec3 axis = c2.position - c1.position;  // 2a e
  return u1.cross(x.p).dot(u2.cross(x.p)) + axis.dot(c1.charge * u1 / u1.norm() - c2.charge * u2 / u2.norm());
}

double axial_angular_momentum(const CentreConfig& cfg, const PhaseState& x) {
  if (cfg.size() < 2) throw Error(ErrorCode::ValidationError, "axis needs at least two centres");
  const Vec3 a = cfg.centre(0).position;
  const Vec3 e = (cfg.centre(1).position - a).normalized();
  for (std::size_t k = 2; k < cfg.size(); ++k) {
    const Vec3 v = cfg.centre(k).position - a;
    if (v.cross(e).norm() > 1e-12 * std::max(1.0, v.norm()))
      throw Error(ErrorCode::ValidationError, "centres are not collinear");
  }
  return (x.q - a).cross(x.p).dot(e);
}

}  // namespace ncentre
