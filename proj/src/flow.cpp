#include "ncentre/flow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "ncentre/kepler.hpp"

namespace ncentre {

void IntegratorSettings::validate() const {
  if (!(step > 0.0)) throw Error(ErrorCode::ValidationError, "integrator step must be positive");
  if (!(energy_tol > 0.0)) throw Error(ErrorCode::ValidationError, "energy_tol must be positive");
  if (!(collision_guard > 0.0)) throw Error(ErrorCode::ValidationError, "collision_guard must be positive");
  if (order != 2 && order != 4) throw Error(ErrorCode::ValidationError, "splitting order must be 2 or 4");
  if (max_steps <= 0) throw Error(ErrorCode::ValidationError, "max_steps must be positive");
}

namespace {

double far_radius(const CentreConfig& cfg) {
  return cfg.size() < 2 ? std::numeric_limits<double>::infinity() : 4.0 * cfg.max_centre_norm();
}

double reference_distance(const CentreConfig& cfg) {
  return cfg.size() < 2 ? std::numeric_limits<double>::infinity() : cfg.min_pair_distance() / 10.0;
}

double min_distance(const CentreConfig& cfg, const Vec3& q) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : cfg.centres()) d = std::min(d, (q - c.position).norm());
  return d;
}

// State expressed relative to the drift centre of the current split, so
// that close approaches never round positions to absolute coordinates.
struct LocalState {
  int l = 0;
  Vec3 rel = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  double t = 0.0;
};

Vec3 split_centre(const CentreConfig& cfg, int l) {
  return l == kFarField ? Vec3::Zero() : cfg.centre(l).position;
}

double split_charge(const CentreConfig& cfg, int l) {
  return l == kFarField ? cfg.total_charge() : cfg.centre(l).charge;
}

LocalState to_local(const CentreConfig& cfg, const PhaseState& x, int l) {
  return {l, x.q - split_centre(cfg, l), x.p, x.t};
}

PhaseState to_absolute(const CentreConfig& cfg, const LocalState& y) {
  return {split_centre(cfg, y.l) + y.rel, y.p, y.t};
}

LocalState rebase(const CentreConfig& cfg, const LocalState& y, int l) {
  if (y.l == l) return y;
  return {l, (split_centre(cfg, y.l) - split_centre(cfg, l)) + y.rel, y.p, y.t};
}

// grad W_l at the position s_l + rel.
Vec3 grad_perturbation(const CentreConfig& cfg, const LocalState& y, double guard) {
  Vec3 g = Vec3::Zero();
  const Vec3 base = split_centre(cfg, y.l);
  for (std::size_t k = 0; k < cfg.size(); ++k) {
    if (static_cast<int>(k) == y.l) {
      if (y.rel.norm() < guard) throw Error(ErrorCode::CollisionPoint, "kick evaluated at a centre");
      continue;
    }
    const Vec3 d = (base - cfg.centre(k).position) + y.rel;
    const double r = d.norm();
    if (r < guard) throw Error(ErrorCode::CollisionPoint, "kick evaluated at a centre");
    g += cfg.centre(k).charge / (r * r * r) * d;
  }
  if (y.l == kFarField) {
    const double r = y.rel.norm();
    g -= cfg.total_charge() / (r * r * r) * y.rel;
  }
  return g;
}

double local_energy(const CentreConfig& cfg, const LocalState& y) {
  const Vec3 base = split_centre(cfg, y.l);
  double v = 0.0;
  for (std::size_t k = 0; k < cfg.size(); ++k) {
    const double r = static_cast<int>(k) == y.l ? y.rel.norm() : ((base - cfg.centre(k).position) + y.rel).norm();
    if (r < cfg.collision_guard()) throw Error(ErrorCode::CollisionPoint, "energy evaluated at a centre");
    v -= cfg.centre(k).charge / r;
  }
  return 0.5 * y.p.squaredNorm() + v;
}

// Size of the terms summed in H: the round-off floor of an energy comparison.
double energy_magnitude(const CentreConfig& cfg, const LocalState& y) {
  const Vec3 base = split_centre(cfg, y.l);
  double m = 0.5 * y.p.squaredNorm();
  for (std::size_t k = 0; k < cfg.size(); ++k) {
    const double r = static_cast<int>(k) == y.l ? y.rel.norm() : ((base - cfg.centre(k).position) + y.rel).norm();
    m += std::abs(cfg.centre(k).charge) / r;
  }
  return m;
}

double local_min_distance(const CentreConfig& cfg, const LocalState& y) {
  const Vec3 base = split_centre(cfg, y.l);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cfg.size(); ++k)
    d = std::min(d, static_cast<int>(k) == y.l ? y.rel.norm() : ((base - cfg.centre(k).position) + y.rel).norm());
  return d;
}

void drift(const CentreConfig& cfg, LocalState& y, double h, double guard) {
  PhaseState rel{y.rel, y.p, y.t};
  rel = kepler_propagate(split_charge(cfg, y.l), Vec3::Zero(), rel, h, guard);
  y.rel = rel.q;
  y.p = rel.p;
  y.t = rel.t;
}

LocalState strang(const CentreConfig& cfg, const LocalState& x, double h, double guard) {
  LocalState y = x;
  y.p -= 0.5 * h * grad_perturbation(cfg, y, guard);
  drift(cfg, y, h, guard);
  y.p -= 0.5 * h * grad_perturbation(cfg, y, guard);
  return y;
}

LocalState composed(const CentreConfig& cfg, const LocalState& x, double h, int order, double guard) {
  if (order == 2) return strang(cfg, x, h, guard);
  // Yoshida triple jump; the inner half kicks of neighbouring stages merge.
  static const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
  static const double w0 = 1.0 - 2.0 * w1;
  const double c[3] = {w1 * h, w0 * h, w1 * h};
  LocalState y = x;
  y.p -= 0.5 * c[0] * grad_perturbation(cfg, y, guard);
  for (int i = 0; i < 3; ++i) {
    drift(cfg, y, c[i], guard);
    const double kick = (i < 2) ? 0.5 * (c[i] + c[i + 1]) : 0.5 * c[2];
    y.p -= kick * grad_perturbation(cfg, y, guard);
  }
  y.t = x.t + h;
  return y;
}

// Far field: h * (|q| / r_far)^(3/2).
// Near centres: h * min(1, (D / d_ref)^(3/2)), D the distance to the nearest
// centre. A pericentre inside the step is passed with the step of its own
// distance; a near collision (D below d_ref * 2e-4) is jumped in one step
// landing at the mirror point of the two-body orbit.
double step_size(const CentreConfig& cfg, const LocalState& y, double sign, double base, double d_ref,
                 double r_far) {
  if (y.l == kFarField) return base * std::pow(std::max(1.0, y.rel.norm() / r_far), 1.5);
  if (!std::isfinite(d_ref)) return base * std::pow(std::max(1.0, y.rel.norm()), 1.5);  // one centre: the drift is exact
  const double D = local_min_distance(cfg, y);
  const double h = base * std::min(1.0, std::pow(D / d_ref, 1.5));
  const auto el = osculating_elements(split_charge(cfg, y.l), Vec3::Zero(), PhaseState{y.rel, y.p, y.t});
  const double to_pericentre = -sign * el.pericentre_time;
  if (!(to_pericentre > 0.0)) return h;
  const double d_jump = 2e-4 * d_ref;
  if (y.rel.norm() <= d_jump) return 2.0 * to_pericentre;
  if (to_pericentre < h) {
    if (el.pericentre_distance >= d_jump) return base * std::min(1.0, std::pow(el.pericentre_distance / d_ref, 1.5));
    return 0.5 * to_pericentre;
  }
  return h;
}

}  // namespace

int nearest_centre(const CentreConfig& cfg, const Vec3& q) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cfg.size(); ++k) {
    const double d = (q - cfg.centre(k).position).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

int split_index(const CentreConfig& cfg, const Vec3& q) {
  return q.norm() > far_radius(cfg) ? kFarField : nearest_centre(cfg, q);
}

PhaseState split_step(const CentreConfig& cfg, const PhaseState& x, double h, int l, double guard) {
  return to_absolute(cfg, strang(cfg, to_local(cfg, x, l), h, guard));
}

PhaseState composed_step(const CentreConfig& cfg, const PhaseState& x, double h, int l, int order, double guard) {
  return to_absolute(cfg, composed(cfg, to_local(cfg, x, l), h, order, guard));
}

Trajectory integrate_partial(const CentreConfig& cfg, const PhaseState& x0, double duration,
                             const IntegratorSettings& settings, const StopRule& stop) {
  settings.validate();
  Trajectory traj;
  const double H0 = energy(cfg, x0);
  traj.initial_energy = H0;
  const double scale = std::max(1.0, std::abs(H0));
  const double local_tol = 0.1 * settings.energy_tol * scale;
  const double sign = duration >= 0.0 ? 1.0 : -1.0;
  const double t_end = x0.t + duration;
  const bool backward = sign < 0.0;
  const double r_vir = H0 > 0.0 ? virial_radius(cfg, H0) : std::numeric_limits<double>::infinity();
  const double d_ref = reference_distance(cfg);
  const double r_far = far_radius(cfg);
  const double guard = settings.collision_guard;
  const double eps = std::numeric_limits<double>::epsilon();

  PhaseState x = x0;
  LocalState y = to_local(cfg, x0, split_index(cfg, x0.q));
  double H = H0;
  traj.samples.push_back(x);
  traj.stats.min_centre_distance = min_distance(cfg, x.q);
  int current_nearest = nearest_centre(cfg, x.q);

  while (sign * (t_end - y.t) > 0.0) {
    if (stop.on_escape && x.q.norm() >= stop.min_radius && escape_check_radius(x, r_vir, backward)) {
      traj.status = FlowStatus::Escaped;
      break;
    }
    if (traj.stats.steps >= settings.max_steps) {
      traj.status = FlowStatus::StepLimit;
      break;
    }
    y = rebase(cfg, y, split_index(cfg, x.q));
    const int l = y.l;
    double h = step_size(cfg, y, sign, settings.step, d_ref, r_far);
    h = std::min(h, sign * (t_end - y.t));

    LocalState next;
    double H_next = 0.0;
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      try {
        next = composed(cfg, y, sign * h, settings.order, guard);
        H_next = local_energy(cfg, next);
      } catch (const Error&) {
        h *= 0.5;
        ++traj.stats.rejections;
        continue;
      }
      const double floor = 16.0 * eps * std::max(energy_magnitude(cfg, y), energy_magnitude(cfg, next));
      if (std::abs(H_next - H) > local_tol + floor && attempt < 30) {
        h *= 0.5;
        ++traj.stats.rejections;
        continue;
      }
      accepted = true;
      break;
    }
    if (!accepted) {
      traj.status = FlowStatus::CollisionAbort;
      break;
    }
    if (sign * (t_end - next.t) < 1e-14 * std::max(1.0, std::abs(t_end))) next.t = t_end;
    const PhaseState x_next = to_absolute(cfg, next);

    if (stop.record_events && l != kFarField) {
      const double before = y.rel.dot(y.p);
      const double after = next.rel.dot(next.p);
      if (sign * before < 0.0 && sign * after >= 0.0) {
        const double Z = cfg.centre(l).charge;
        const auto el = osculating_elements(Z, Vec3::Zero(), PhaseState{y.rel, y.p, y.t});
        FlowEvent ev;
        ev.kind = EventKind::Pericentre;
        ev.centre = l;
        ev.t = y.t - el.pericentre_time;
        try {
          const auto peri = kepler_propagate(Z, Vec3::Zero(), PhaseState{y.rel, y.p, y.t}, -el.pericentre_time, guard);
          ev.state = PhaseState{cfg.centre(l).position + peri.q, peri.p, ev.t};
        } catch (const Error&) {
          ev.collision = true;
          ev.state = PhaseState{cfg.centre(l).position, Vec3::Zero(), ev.t};
        }
        traj.events.push_back(ev);
      }
    }
    const int nearest = nearest_centre(cfg, x_next.q);
    if (stop.record_events && nearest != current_nearest)
      traj.events.push_back({EventKind::CentreSwitch, x_next.t, nearest, x_next, false});
    current_nearest = nearest;
    if (stop.record_events && std::isfinite(r_vir)) {
      const bool was_out = x.q.norm() >= r_vir, is_out = x_next.q.norm() >= r_vir;
      if (was_out != is_out)
        traj.events.push_back({EventKind::VirialCrossing, x_next.t, is_out ? 1 : -1, x_next, false});
    }

    traj.split_centres.push_back(l);
    y = next;
    x = x_next;
    traj.stats.max_step_drift = std::max(traj.stats.max_step_drift, std::abs(H_next - H) / scale);
    H = H_next;
    traj.samples.push_back(x);
    ++traj.stats.steps;
    traj.stats.min_centre_distance = std::min(traj.stats.min_centre_distance, local_min_distance(cfg, y));
    traj.stats.max_energy_drift = std::max(traj.stats.max_energy_drift, std::abs(H - H0) / scale);
  }
  traj.split_centres.push_back(split_index(cfg, x.q));
  return traj;
}

Trajectory integrate(const CentreConfig& cfg, const PhaseState& x0, double duration,
                     const IntegratorSettings& settings, const StopRule& stop) {
  auto traj = integrate_partial(cfg, x0, duration, settings, stop);
  if (traj.status == FlowStatus::CollisionAbort)
    throw Error(ErrorCode::CollisionAbort, "step could not avoid a centre at t=" + std::to_string(traj.back().t));
  if (traj.status == FlowStatus::StepLimit)
    throw Error(ErrorCode::StepLimit, "maximum step count reached at t=" + std::to_string(traj.back().t));
  return traj;
}

std::vector<RadiusCrossing> find_radius_crossings(const CentreConfig& cfg, const Trajectory& traj, double R,
                                                  const IntegratorSettings& settings) {
  std::vector<RadiusCrossing> out;
  const auto& s = traj.samples;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double a = s[i].q.norm() - R;
    const double b = s[i + 1].q.norm() - R;
    if ((a < 0.0) == (b < 0.0)) continue;
    const int l = traj.split_centres[i];
    const double span = s[i + 1].t - s[i].t;
    double lo = 0.0, hi = span;  // phi(lo) has the sign of a
    double delta = span * a / (a - b);
    PhaseState y = s[i];
    for (int it = 0; it < 100; ++it) {
      y = composed_step(cfg, s[i], delta, l, settings.order, settings.collision_guard);
      const double rn = y.q.norm();
      const double phi = rn - R;
      if (phi == 0.0) break;
      ((phi < 0.0) == (a < 0.0) ? lo : hi) = delta;
      const double rate = y.q.dot(y.p) / rn;
      double next = rate != 0.0 ? delta - phi / rate : 0.5 * (lo + hi);
      if (!(next > std::min(lo, hi) && next < std::max(lo, hi))) next = 0.5 * (lo + hi);
      const double change = std::abs(next - delta);
      delta = next;
      if (change < 1e-14 * std::max(1.0, std::abs(s[i].t)) || std::abs(phi) < 1e-14 * R) {
        y = composed_step(cfg, s[i], delta, l, settings.order, settings.collision_guard);
        break;
      }
    }
    RadiusCrossing c;
    c.t = s[i].t + delta;
    y.t = c.t;
    c.state = y;
    c.direction = b > a ? 1 : -1;
    out.push_back(c);
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const CentreConfig& cfg, const Trajectory& traj) {
  const int d = cfg.dimension();
  const char* axes = "xyz";
  out << "t";
  for (int i = 0; i < d; ++i) out << ",q" << axes[i];
  for (int i = 0; i < d; ++i) out << ",p" << axes[i];
  out << ",H,nearest_centre,min_distance\n";
  const auto old_precision = out.precision(17);
  for (const auto& x : traj.samples) {
    out << x.t;
    for (int i = 0; i < d; ++i) out << ',' << x.q[i];
    for (int i = 0; i < d; ++i) out << ',' << x.p[i];
    out << ',' << energy(cfg, x) << ',' << nearest_centre(cfg, x.q) + 1 << ',' << min_distance(cfg, x.q) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace ncentre
