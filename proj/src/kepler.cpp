#include "ncentre/kepler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace ncentre {

namespace {

// x - sin x and sinh x - x without cancellation for small x.
double x_minus_sin(double x) {
  if (std::abs(x) > 0.5) return x - std::sin(x);
  const double x2 = x * x;
  double term = x * x2 / 6.0, sum = 0.0;
  for (int k = 1; k < 12; ++k) {
    sum += term;
    term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
  }
  return sum;
}

double sinh_minus_x(double x) {
  if (std::abs(x) > 0.5) return std::sinh(x) - x;
  const double x2 = x * x;
  double term = x * x2 / 6.0, sum = 0.0;
  for (int k = 1; k < 12; ++k) {
    sum += term;
    term *= x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
  }
  return sum;
}

// Stumpff functions c0..c3 at z.
std::array<double, 4> stumpff(double z) {
  std::array<double, 4> c{};
  if (std::abs(z) < 1.0) {
    // c_k(z) = sum_j (-z)^j / (k + 2j)!
    for (int k = 0; k < 4; ++k) {
      double fact = 1.0;
      for (int i = 2; i <= k; ++i) fact *= i;
      double term = 1.0 / fact, sum = 0.0;
      for (int j = 0; j < 16; ++j) {
        sum += term;
        term *= -z / ((k + 2.0 * j + 1.0) * (k + 2.0 * j + 2.0));
      }
      c[k] = sum;
    }
  } else if (z > 0.0) {
    const double w = std::sqrt(z);
    c[0] = std::cos(w);
    c[1] = std::sin(w) / w;
    c[2] = (1.0 - c[0]) / z;
    c[3] = (w - std::sin(w)) / (z * w);
  } else {
    const double w = std::sqrt(-z);
    c[0] = std::cosh(w);
    c[1] = std::sinh(w) / w;
    c[2] = (c[0] - 1.0) / -z;
    c[3] = (std::sinh(w) - w) / (-z * w);
  }
  return c;
}

struct Universal {
  double r0, sigma0, mu, beta;

  // G-functions G_k(s) = s^k c_k(beta s^2).
  std::array<double, 4> g(double s) const {
    auto c = stumpff(beta * s * s);
    return {c[0], s * c[1], s * s * c[2], s * s * s * c[3]};
  }
  double time(const std::array<double, 4>& G) const { return r0 * G[1] + sigma0 * G[2] + mu * G[3]; }
  double radius(const std::array<double, 4>& G) const { return r0 * G[0] + sigma0 * G[1] + mu * G[2]; }
};

// Solves t(s) = dt; t is nondecreasing in s because dt/ds = r >= 0.
double solve_universal(const Universal& u, double dt) {
  if (dt == 0.0) return 0.0;
  const double sign = dt > 0 ? 1.0 : -1.0;
  double lo = 0.0;
  double hi = dt / u.r0;
  for (int i = 0; i < 200 && sign * (u.time(u.g(hi)) - dt) < 0.0; ++i) {
    lo = hi;
    hi *= 2.0;
  }
  double s = std::clamp(dt / u.r0, std::min(lo, hi), std::max(lo, hi));
  if (s == lo || s == hi) s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto G = u.g(s);
    const double f = u.time(G) - dt;
    const double fp = u.radius(G);
    if (f == 0.0) return s;
    if (sign * f < 0.0)
      lo = s;
    else
      hi = s;
    double next = (fp > 0.0) ? s - f / fp : 0.5 * (lo + hi);
    if (!(next > std::min(lo, hi) && next < std::max(lo, hi))) next = 0.5 * (lo + hi);
    const double step = std::abs(next - s);
    s = next;
    if (step <= 1e-13 * std::abs(s) || std::abs(hi - lo) <= 1e-15 * std::abs(s)) break;
  }
  return s;
}

}  // namespace

double pericentre_distance(double charge, double energy, double angular_momentum_sq) {
  const double F = std::sqrt(std::max(0.0, charge * charge + 2.0 * energy * angular_momentum_sq));
  if (charge > 0.0) {
    const double denom = charge + F;
    return denom > 0.0 ? angular_momentum_sq / denom : 0.0;
  }
  return (F - charge) / (2.0 * energy);
}

double time_from_pericentre(double charge, double energy, double angular_momentum_sq, double r) {
  const double Z = charge;
  const double a = 2.0 * energy;
  const double L2 = angular_momentum_sq;
  const double F = std::sqrt(std::max(0.0, Z * Z + a * L2));
  const double rmin = pericentre_distance(Z, energy, L2);
  const double dr = std::max(0.0, r - rmin);
  if (dr == 0.0) return 0.0;

  if (a == 0.0) {
    // Parabolic: Q = 2 Z r - L^2.
    const double Q = std::max(0.0, 2.0 * Z * r - L2);
    return (2.0 / 3.0 * Q * std::sqrt(Q) + 2.0 * L2 * std::sqrt(Q)) / (4.0 * Z * Z);
  }
  if (F == 0.0) {
    // Circular orbit (a < 0), or free radial motion (Z = 0, L = 0).
    return a > 0.0 ? r / std::sqrt(a) : 0.0;
  }
  // F - Z without cancellation.
  const double F_minus_Z = (Z > 0.0) ? a * L2 / (F + Z) : F - Z;
  const double delta = std::abs(a) * dr / F;
  if (a > 0.0) {
    const double u = std::log1p(delta + std::sqrt(delta * (2.0 + delta)));  // acosh(1 + delta)
    return (F * sinh_minus_x(u) + F_minus_Z * u) / (a * std::sqrt(a));
  }
  const double alpha = -a;
  const double v = 2.0 * std::asin(std::sqrt(std::min(1.0, 0.5 * delta)));  // acos(1 - delta)
  return (Z * x_minus_sin(v) - F_minus_Z * std::sin(v)) / (alpha * std::sqrt(alpha));
}

KeplerElements osculating_elements(double charge, const Vec3& centre, const PhaseState& x,
                                   double min_runge_lenz) {
  const Vec3 rel = x.q - centre;
  const double r = rel.norm();
  if (r == 0.0) throw Error(ErrorCode::CollisionPoint, "state at the centre");
  KeplerElements el;
  el.centre = centre;
  el.charge = charge;
  el.energy = 0.5 * x.p.squaredNorm() - charge / r;
  el.angular_momentum = rel.cross(x.p);
  el.runge_lenz = x.p.cross(el.angular_momentum) - charge * rel / r;
  const double fnorm = el.runge_lenz.norm();
  if (fnorm < min_runge_lenz)
    throw Error(ErrorCode::DegenerateElements, "Runge-Lenz vector below threshold");
  el.pericentre_direction = fnorm > 0.0 ? Vec3(el.runge_lenz / fnorm) : Vec3::Zero();
  const double L2 = el.angular_momentum.squaredNorm();
  el.pericentre_distance = pericentre_distance(charge, el.energy, L2);
  const double radial = rel.dot(x.p);
  const double sgn = radial > 0.0 ? 1.0 : (radial < 0.0 ? -1.0 : 0.0);
  el.pericentre_time = sgn * time_from_pericentre(charge, el.energy, L2, r);
  return el;
}

PhaseState kepler_propagate(double charge, const Vec3& centre, const PhaseState& x, double dt, double guard) {
  PhaseState out = x;
  out.t = x.t + dt;
  if (dt == 0.0) return out;
  const Vec3 r0v = x.q - centre;
  const double r0 = r0v.norm();
  if (r0 < guard) throw Error(ErrorCode::ExactCollision, "propagation started at the centre");
  if (charge == 0.0) {
    out.q = x.q + dt * x.p;
    return out;
  }
  Universal u{r0, r0v.dot(x.p), charge, 2.0 * charge / r0 - x.p.squaredNorm()};
  const double s = solve_universal(u, dt);
  const auto G = u.g(s);
  const double r = u.radius(G);
  if (!(r >= guard)) throw Error(ErrorCode::ExactCollision, "propagation ends at the centre");
  const double f = 1.0 - charge * G[2] / r0;
  const double g = r0 * G[1] + u.sigma0 * G[2];
  const double fdot = -charge * G[1] / (r * r0);
  const double gdot = 1.0 - charge * G[2] / r;
  out.q = centre + f * r0v + g * x.p;
  out.p = fdot * r0v + gdot * x.p;
  return out;
}

AsymptoteData asymptote_data(const KeplerElements& el) {
  if (!(el.energy > 0.0)) throw Error(ErrorCode::NotHyperbolic, "asymptotes need positive energy");
  const double k = std::sqrt(2.0 * el.energy);
  const double Z = el.charge;
  const Vec3& L = el.angular_momentum;
  const Vec3& F = el.runge_lenz;
  const double denom = L.squaredNorm() + Z * Z / (k * k);
  if (denom == 0.0) throw Error(ErrorCode::DegenerateElements, "free radial orbit has no element asymptotes");
  const Vec3 LxF = L.cross(F);
  AsymptoteData out;
  out.p_out = (LxF - (Z / k) * F) / denom;
  out.p_in = (LxF + (Z / k) * F) / denom;
  out.deflection = std::atan2(out.p_in.cross(out.p_out).norm(), out.p_in.dot(out.p_out));
  return out;
}

double time_in_ball(const KeplerElements& el, double R) {
  if (!(el.energy > 0.0)) throw Error(ErrorCode::NotHyperbolic, "time in ball needs positive energy");
  if (R < el.pericentre_distance * (1.0 - 1e-12))
    throw Error(ErrorCode::BelowPericentre, "radius below pericentre distance");
  return 2.0 * time_from_pericentre(el.charge, el.energy, el.angular_momentum.squaredNorm(), R);
}

}  // namespace ncentre
