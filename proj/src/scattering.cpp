#include "ncentre/scattering.hpp"

#include <algorithm>
#include <cmath>

namespace ncentre {

std::string to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::Scattering: return "Scattering";
    case OrbitClass::TrappedForward: return "TrappedForward";
    case OrbitClass::TrappedBackward: return "TrappedBackward";
    case OrbitClass::BoundedToHorizon: return "BoundedToHorizon";
    case OrbitClass::CollisionFlagged: return "CollisionFlagged";
  }
  return "Unknown";
}

void ScatterSettings::validate() const {
  integrator.validate();
  if (!(horizon > 0.0)) throw Error(ErrorCode::ValidationError, "horizon must be positive");
  if (j_min < 0 || j_max - j_min < 3) throw Error(ErrorCode::ValidationError, "radius ladder needs j_max - j_min >= 3");
  if (richardson_levels < 0 || richardson_levels >= j_max - j_min)
    throw Error(ErrorCode::ValidationError, "richardson_levels must lie in [0, j_max - j_min)");
  if (!(tau_tol > 0.0)) throw Error(ErrorCode::ValidationError, "tau_tol must be positive");
}

KeplerElements MoellerDatum::elements() const {
  KeplerElements el;
  el.charge = charge;
  el.energy = energy;
  el.angular_momentum = angular_momentum;
  el.runge_lenz = runge_lenz;
  const double f = runge_lenz.norm();
  if (f > 0.0) el.pericentre_direction = runge_lenz / f;
  el.pericentre_distance = pericentre_distance(charge, energy, angular_momentum.squaredNorm());
  return el;
}

Extrapolation richardson(const std::vector<double>& values, int levels) {
  const int n = static_cast<int>(values.size());
  if (n == 0) return {};
  levels = std::min(levels, n - 1);
  std::vector<std::vector<double>> T(n, std::vector<double>(levels + 1, 0.0));
  for (int j = 0; j < n; ++j) {
    T[j][0] = values[j];
    for (int m = 1; m <= std::min(j, levels); ++m)
      T[j][m] = T[j][m - 1] + (T[j][m - 1] - T[j - 1][m - 1]) / (std::ldexp(1.0, m) - 1.0);
  }
  Extrapolation out;
  out.value = T[n - 1][levels];
  if (n >= 2) {
    const int m = std::min(levels, n - 2);
    out.error = std::abs(T[n - 1][levels] - T[n - 2][m]);
  }
  return out;
}

namespace {

struct Leg {
  Trajectory traj;
  bool escaped = false;
  bool collision = false;
  double t_escape = 0.0;
};

void append(Trajectory& a, const Trajectory& b) {
  a.split_centres.pop_back();
  a.samples.insert(a.samples.end(), b.samples.begin() + 1, b.samples.end());
  a.split_centres.insert(a.split_centres.end(), b.split_centres.begin(), b.split_centres.end());
  a.stats.steps += b.stats.steps;
  a.stats.rejections += b.stats.rejections;
  a.stats.min_centre_distance = std::min(a.stats.min_centre_distance, b.stats.min_centre_distance);
  a.stats.max_energy_drift = std::max(a.stats.max_energy_drift, b.stats.max_energy_drift);
  a.stats.max_step_drift = std::max(a.stats.max_step_drift, b.stats.max_step_drift);
  a.status = b.status;
}

// Integrates in one time direction until escape or the horizon.
Leg run_leg(const CentreConfig& cfg, const PhaseState& x, double sign, const ScatterSettings& s) {
  Leg leg;
  StopRule stop;
  stop.on_escape = true;
  stop.record_events = false;
  leg.traj = integrate_partial(cfg, x, sign * s.horizon, s.integrator, stop);
  leg.collision = leg.traj.status == FlowStatus::CollisionAbort;
  leg.escaped = leg.traj.status == FlowStatus::Escaped;
  if (leg.escaped) leg.t_escape = leg.traj.back().t;
  return leg;
}

// Continues an escaped leg until |q| >= r_target.
void extend_leg(const CentreConfig& cfg, Leg& leg, double sign, const ScatterSettings& s, double r_target) {
  if (leg.traj.back().q.norm() >= r_target) return;
  StopRule stop;
  stop.on_escape = true;
  stop.record_events = false;
  stop.min_radius = r_target;
  const double duration = 2.0 * r_target / std::sqrt(0.5 * leg.traj.initial_energy) + 1.0;
  const auto more = integrate_partial(cfg, leg.traj.back(), sign * duration, s.integrator, stop);
  append(leg.traj, more);
  if (more.status != FlowStatus::Escaped) leg.escaped = false;
}

double min_radius(const Trajectory& t) {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& x : t.samples) r = std::min(r, x.q.norm());
  return r;
}

Classification classification_of(const Leg& fwd, const Leg& bwd, double horizon) {
  Classification c;
  c.horizon = horizon;
  c.escaped_forward = fwd.escaped;
  c.escaped_backward = bwd.escaped;
  c.t_plus = fwd.t_escape;
  c.t_minus = bwd.t_escape;
  if (fwd.collision || bwd.collision)
    c.kind = OrbitClass::CollisionFlagged;
  else if (fwd.escaped && bwd.escaped)
    c.kind = OrbitClass::Scattering;
  else if (fwd.escaped)
    c.kind = OrbitClass::TrappedBackward;
  else if (bwd.escaped)
    c.kind = OrbitClass::TrappedForward;
  else
    c.kind = OrbitClass::BoundedToHorizon;
  return c;
}

double relative_change(const Vec3& a, const Vec3& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

Classification classify(const CentreConfig& cfg, const PhaseState& x, const ScatterSettings& settings) {
  settings.validate();
  if (!(energy(cfg, x) > 0.0)) throw Error(ErrorCode::NonpositiveEnergy, "classification needs H > 0");
  const auto fwd = run_leg(cfg, x, +1.0, settings);
  const auto bwd = run_leg(cfg, x, -1.0, settings);
  return classification_of(fwd, bwd, settings.horizon);
}

ScatterData scatter(const CentreConfig& cfg, const PhaseState& x, const ScatterSettings& settings) {
  auto out = analyse(cfg, x, settings);
  if (out.classification.kind != OrbitClass::Scattering)
    throw Error(ErrorCode::NotScattering, "state is " + to_string(out.classification.kind));
  return out;
}

ScatterData analyse(const CentreConfig& cfg, const PhaseState& x, const ScatterSettings& settings) {
  settings.validate();
  ScatterData out;
  const double E = energy(cfg, x);
  out.energy = E;
  if (!(E > 0.0)) throw Error(ErrorCode::NonpositiveEnergy, "scattering needs H > 0");
  const double r_vir = virial_radius(cfg, E);

  // The classification legs already reach the virial sphere; the radius
  // ladder is shifted outward if the orbit never enters R_vir * 2^j_min.
  auto fwd = run_leg(cfg, x, +1.0, settings);
  auto bwd = run_leg(cfg, x, -1.0, settings);
  out.classification = classification_of(fwd, bwd, settings.horizon);
  if (out.classification.kind != OrbitClass::Scattering) {
    out.failure = "state is " + to_string(out.classification.kind);
    return out;
  }

  const double r_min = std::min(min_radius(fwd.traj), min_radius(bwd.traj));
  double R0 = std::ldexp(r_vir, settings.j_min);
  while (R0 <= 1.01 * r_min) R0 *= 2.0;
  const int J = settings.j_max - settings.j_min;
  const double r_top = std::ldexp(R0, J) * 1.01;
  extend_leg(cfg, fwd, +1.0, settings, r_top);
  extend_leg(cfg, bwd, -1.0, settings, r_top);
  if (!fwd.escaped || !bwd.escaped) throw Error(ErrorCode::NotScattering, "orbit lost escape while extending the legs");

  const double Zinf = cfg.total_charge();
  std::vector<double> t_in(J + 1), t_out(J + 1);
  std::vector<KeplerElements> el_in(J + 1), el_out(J + 1);
  std::vector<double> H_in(J + 1), H_out(J + 1);
  for (int j = 0; j <= J; ++j) {
    const double R = std::ldexp(R0, j);
    out.radii.push_back(R);
    struct Hit {
      double t;
      PhaseState state;
      int dir;  // in forward time
    };
    std::vector<Hit> hits;
    for (const auto& c : find_radius_crossings(cfg, fwd.traj, R, settings.integrator)) hits.push_back({c.t, c.state, c.direction});
    for (const auto& c : find_radius_crossings(cfg, bwd.traj, R, settings.integrator)) hits.push_back({c.t, c.state, -c.direction});
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.t < b.t; });
    if (hits.size() != 2 || hits[0].dir != -1 || hits[1].dir != +1) {
      out.failure = "radius " + std::to_string(R) + " is not crossed exactly once inward and once outward";
      return out;
    }
    t_in[j] = hits[0].t;
    t_out[j] = hits[1].t;
    H_in[j] = energy(cfg, hits[0].state);
    H_out[j] = energy(cfg, hits[1].state);
    el_in[j] = osculating_elements(Zinf, Vec3::Zero(), hits[0].state);
    el_out[j] = osculating_elements(Zinf, Vec3::Zero(), hits[1].state);
  }

  const int levels = settings.richardson_levels;
  auto extrapolate = [&](const std::vector<KeplerElements>& el, int direction) {
    MoellerDatum d;
    d.direction = direction;
    d.charge = Zinf;
    d.radii = out.radii;
    std::vector<double> e(J + 1);
    for (int j = 0; j <= J; ++j) e[j] = el[j].energy;
    d.energy = richardson(e, levels).value;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> L(J + 1), F(J + 1);
      for (int j = 0; j <= J; ++j) L[j] = el[j].angular_momentum[i], F[j] = el[j].runge_lenz[i];
      d.angular_momentum[i] = richardson(L, levels).value;
      d.runge_lenz[i] = richardson(F, levels).value;
    }
    for (int j = 0; j < J; ++j)
      d.residuals.push_back(std::max(relative_change(el[j + 1].angular_momentum, el[j].angular_momentum),
                                     relative_change(el[j + 1].runge_lenz, el[j].runge_lenz)));
    return d;
  };
  out.outgoing = extrapolate(el_out, +1);
  out.incoming = extrapolate(el_in, -1);

  try {
    const auto a_out = asymptote_data(out.outgoing.elements());
    const auto a_in = asymptote_data(out.incoming.elements());
    out.p_plus = a_out.p_out;
    out.p_minus = a_in.p_in;
    // Each rung compares against the limit hyperbola at the energy the
    // numerical orbit actually carries there.
    auto ball_time = [](KeplerElements el, double H, double R) {
      el.energy = H;
      el.pericentre_distance = pericentre_distance(el.charge, H, el.angular_momentum.squaredNorm());
      return R > el.pericentre_distance ? time_in_ball(el, R) : 0.0;
    };
    const auto k_out = out.outgoing.elements();
    const auto k_in = out.incoming.elements();
    for (int j = 0; j <= J; ++j) {
      const double R = out.radii[j];
      const double T_out = ball_time(k_out, H_out[j], R);
      const double T_in = ball_time(k_in, H_in[j], R);
      out.tau_ladder.push_back((t_out[j] - t_in[j]) - 0.5 * (T_out + T_in));
    }
  } catch (const Error& e) {
    out.failure = e.what();
    return out;
  }
  const auto tau = richardson(out.tau_ladder, levels);
  out.tau = tau.value;
  out.tau_err = tau.error;

  const double floor = 1e-10 * std::max(1.0, std::abs(out.tau));
  out.ladder_monotone = true;
  for (int j = 1; j < J; ++j) {
    const double a = std::abs(out.tau_ladder[j] - out.tau_ladder[j - 1]);
    const double b = std::abs(out.tau_ladder[j + 1] - out.tau_ladder[j]);
    if (b > a && b > floor) out.ladder_monotone = false;
  }

  auto contracts = [](const std::vector<double>& r) {
    const double floor = 1e-11;
    for (std::size_t j = r.size() - 3; j + 1 < r.size(); ++j)
      if (r[j + 1] > r[j] / 1.5 && r[j + 1] > floor) return false;
    return true;
  };
  out.converged = true;
  if (!contracts(out.outgoing.residuals) || !contracts(out.incoming.residuals)) {
    out.converged = false;
    out.failure = "Moeller element residuals do not contract";
  } else if (out.tau_err > settings.tau_tol * std::max(1.0, std::abs(out.tau))) {
    out.converged = false;
    out.failure = "time delay ladder error " + std::to_string(out.tau_err) + " above tolerance";
  }
  return out;
}

MoellerDatum moeller_datum(const CentreConfig& cfg, const PhaseState& x, int direction,
                           const ScatterSettings& settings) {
  const auto s = scatter(cfg, x, settings);
  const auto& d = direction >= 0 ? s.outgoing : s.incoming;
  if (d.residuals.empty() || (!s.converged && s.failure.find("Moeller") != std::string::npos) ||
      s.tau_ladder.empty())
    throw Error(ErrorCode::NoConvergence, s.failure);
  return d;
}

Vec3 asymptotic_momentum(const CentreConfig& cfg, const PhaseState& x, int direction,
                         const ScatterSettings& settings) {
  const auto s = scatter(cfg, x, settings);
  if (s.tau_ladder.empty() || (!s.converged && s.failure.find("Moeller") != std::string::npos))
    throw Error(ErrorCode::NoConvergence, s.failure);
  return direction >= 0 ? s.p_plus : s.p_minus;
}

TimeDelay time_delay(const CentreConfig& cfg, const PhaseState& x, const ScatterSettings& settings) {
  const auto s = scatter(cfg, x, settings);
  if (!s.converged) throw Error(ErrorCode::NoConvergence, s.failure);
  return {s.tau, s.tau_err, s.radii, s.tau_ladder};
}

}  // namespace ncentre
