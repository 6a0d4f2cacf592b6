#include "ncentre/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ncentre {

CentreConfig::CentreConfig(int dimension, std::vector<Centre> centres, double collision_guard)
    : dimension_(dimension), centres_(std::move(centres)), collision_guard_(collision_guard) {
  if (dimension_ != 2 && dimension_ != 3)
    throw Error(ErrorCode::ValidationError, "dimension must be 2 or 3");
  if (centres_.empty()) throw Error(ErrorCode::ValidationError, "at least one centre required");
  if (!(collision_guard_ > 0.0))
    throw Error(ErrorCode::ValidationError, "collision_guard must be positive");
  min_pair_distance_ = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centres_.size(); ++k) {
    auto& c = centres_[k];
    if (c.charge == 0.0 || !std::isfinite(c.charge))
      throw Error(ErrorCode::ValidationError, "centre " + std::to_string(k + 1) + " has zero charge");
    if (!c.position.allFinite())
      throw Error(ErrorCode::ValidationError, "centre " + std::to_string(k + 1) + " is not finite");
    if (dimension_ == 2 && c.position.z() != 0.0)
      throw Error(ErrorCode::ValidationError, "planar configuration with nonzero z component");
    total_charge_ += c.charge;
    max_centre_norm_ = std::max(max_centre_norm_, c.position.norm());
    for (std::size_t l = 0; l < k; ++l) {
      const double d = (c.position - centres_[l].position).norm();
      if (d <= collision_guard_) throw Error(ErrorCode::ValidationError, "coincident centres");
      min_pair_distance_ = std::min(min_pair_distance_, d);
    }
  }
}

bool CentreConfig::all_attracting() const {
  return std::all_of(centres_.begin(), centres_.end(), [](const Centre& c) { return c.charge > 0; });
}

namespace {

double checked_distance(const CentreConfig& cfg, const Vec3& q, std::size_t k) {
  const double r = (q - cfg.centre(k).position).norm();
  if (r < cfg.collision_guard())
    throw Error(ErrorCode::CollisionPoint, "position within collision guard of centre " + std::to_string(k + 1));
  return r;
}

}  // namespace

double potential(const CentreConfig& cfg, const Vec3& q) {
  double v = 0.0;
  for (std::size_t k = 0; k < cfg.size(); ++k) v -= cfg.centre(k).charge / checked_distance(cfg, q, k);
  return v;
}

Vec3 grad_potential(const CentreConfig& cfg, const Vec3& q) {
  Vec3 g = Vec3::Zero();
  for (std::size_t k = 0; k < cfg.size(); ++k) {
    const double r = checked_distance(cfg, q, k);
    g += cfg.centre(k).charge / (r * r * r) * (q - cfg.centre(k).position);
  }
  return g;
}

double energy(const CentreConfig& cfg, const PhaseState& x) {
  return 0.5 * x.p.squaredNorm() + potential(cfg, x.q);
}

double virial_rate(const CentreConfig& cfg, const Vec3& q, double E) {
  return 2.0 * (E - potential(cfg, q)) - q.dot(grad_potential(cfg, q));
}

namespace {

std::vector<Vec3> shell_directions(int dimension) {
  std::vector<Vec3> dirs;
  if (dimension == 2) {
    constexpr int count = 96;
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * i / count;
      dirs.emplace_back(std::cos(a), std::sin(a), 0.0);
    }
  } else {
    // Fibonacci lattice on the unit sphere.
    constexpr int count = 400;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double rho = std::sqrt(1.0 - z * z);
      dirs.emplace_back(rho * std::cos(golden * i), rho * std::sin(golden * i), z);
    }
  }
  return dirs;
}

}  // namespace

double virial_radius(const CentreConfig& cfg, double E) {
  if (!(E > 0.0)) throw Error(ErrorCode::NonpositiveEnergy, "virial radius needs E > 0");
  const double floor = 2.0 * cfg.max_centre_norm() + 1.0;
  double abs_charge = 0.0;
  for (const auto& c : cfg.centres()) abs_charge += std::abs(c.charge);
  // Outside 2 max|s_k| every |q - s_k| >= |q|/2, so the rate exceeds
  // 3E/2 - 8 sum|Z_k| / |q|.
  const double analytic = std::max(2.0 * cfg.max_centre_norm(), 16.0 * abs_charge / (3.0 * E));

  const auto dirs = shell_directions(cfg.dimension());
  auto margin = [&](double r) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) {
      try {
        worst = std::min(worst, virial_rate(cfg, r * u, E) - 0.5 * E);
      } catch (const Error&) {
        return -std::numeric_limits<double>::infinity();
      }
    }
    return worst;
  };

  // Radii grid is independent of E so the outermost failing shell moves
  // monotonically inward as E grows.
  constexpr double growth = 1.05;
  double outer_fail = 0.0;
  double outer_fail_next = 0.0;
  for (double r = floor; r < analytic * growth; r *= growth) {
    if (margin(r) <= 0.0) {
      outer_fail = r;
      outer_fail_next = r * growth;
    }
  }
  double threshold = 0.0;
  if (outer_fail > 0.0) {
    double lo = outer_fail, hi = outer_fail_next;
    for (int i = 0; i < 60 && hi - lo > 1e-12 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (margin(mid) <= 0.0 ? lo : hi) = mid;
    }
    threshold = hi;
  }
  return std::max(floor, std::min(2.0 * threshold, analytic));
}

bool escape_check_radius(const PhaseState& x, double r_vir, bool backward) {
  const double qp = x.q.dot(x.p);
  return x.q.norm() >= r_vir && (backward ? qp <= 0.0 : qp >= 0.0);
}

bool escape_check(const CentreConfig& cfg, const PhaseState& x, double E, bool backward) {
  return escape_check_radius(x, virial_radius(cfg, E), backward);
}

double escape_lower_bound(double q0, double E, double t) {
  const double lambda = std::sqrt(0.5 * E) / q0;
  return q0 * std::sqrt(1.0 + lambda * lambda * t * t);
}

}  // namespace ncentre
