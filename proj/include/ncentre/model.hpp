#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstddef>
#include <vector>

#include "ncentre/errors.hpp"

namespace ncentre {

/// All geometry is carried in three components; planar problems keep the
/// third component at zero.
using Vec3 = Eigen::Vector3d;

struct Centre {
  Vec3 position = Vec3::Zero();
  double charge = 1.0;
};

/// Problem instance: n fixed Coulomb centres in R^d (d = 2 or 3).
class CentreConfig {
 public:
  CentreConfig() = default;
  /// Validates on construction; throws Error(ValidationError).
  CentreConfig(int dimension, std::vector<Centre> centres, double collision_guard = 1e-10);

  int dimension() const { return dimension_; }
  std::size_t size() const { return centres_.size(); }
  const std::vector<Centre>& centres() const { return centres_; }
  const Centre& centre(std::size_t k) const { return centres_.at(k); }
  double collision_guard() const { return collision_guard_; }

  /// Sum of all charges: the far-field Coulomb strength.
  double total_charge() const { return total_charge_; }
  double max_centre_norm() const { return max_centre_norm_; }
  double min_pair_distance() const { return min_pair_distance_; }
  bool all_attracting() const;

 private:
  int dimension_ = 3;
  std::vector<Centre> centres_;
  double collision_guard_ = 1e-10;
  double total_charge_ = 0.0;
  double max_centre_norm_ = 0.0;
  double min_pair_distance_ = 0.0;
};

struct PhaseState {
  Vec3 q = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  double t = 0.0;
};

/// V(q) = -sum_k Z_k / |q - s_k|. Throws CollisionPoint inside the guard.
double potential(const CentreConfig& cfg, const Vec3& q);
Vec3 grad_potential(const CentreConfig& cfg, const Vec3& q);
double energy(const CentreConfig& cfg, const PhaseState& x);

/// d/dt <q,p> at fixed energy E, a function of position only.
double virial_rate(const CentreConfig& cfg, const Vec3& q, double E);

/// Radius beyond which d/dt <q,p> > E/2 on the energy shell E.
double virial_radius(const CentreConfig& cfg, double E);

/// True iff the state lies outside the virial radius and moves outward.
/// Pass `backward` to test escape in negative time (<q,p> <= 0).
bool escape_check(const CentreConfig& cfg, const PhaseState& x, double E, bool backward = false);
/// Same test against a precomputed virial radius.
bool escape_check_radius(const PhaseState& x, double r_vir, bool backward = false);

/// Lower bound q0 * sqrt(1 + (lambda t)^2), lambda = sqrt(E/2)/q0, for an
/// escaping trajectory started at radius q0.
double escape_lower_bound(double q0, double E, double t);

}  // namespace ncentre
