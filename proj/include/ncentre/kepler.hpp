#pragma once

#include "ncentre/model.hpp"

namespace ncentre {

/// Osculating two-body data of a state relative to one centre of charge Z.
struct KeplerElements {
  Vec3 centre = Vec3::Zero();
  double charge = 1.0;
  double energy = 0.0;            // H_l = |p|^2/2 - Z/|q - s|
  Vec3 angular_momentum = Vec3::Zero();  // L = (q - s) x p
  Vec3 runge_lenz = Vec3::Zero();        // F = p x L - Z (q - s)/|q - s|
  Vec3 pericentre_direction = Vec3::Zero();
  double pericentre_time = 0.0;   // signed time since pericentre passage
  double pericentre_distance = 0.0;
};

/// Closest approach distance of the two-body orbit with these invariants.
double pericentre_distance(double charge, double energy, double angular_momentum_sq);

/// Time the two-body orbit needs to go from pericentre out to radius r
/// (r >= r_min; for bound orbits r <= apocentre). Closed form for all
/// energies, stable through the parabolic limit.
double time_from_pericentre(double charge, double energy, double angular_momentum_sq, double r);

/// Throws DegenerateElements if |F| < min_runge_lenz.
KeplerElements osculating_elements(double charge, const Vec3& centre, const PhaseState& x,
                                   double min_runge_lenz = 0.0);

/// Exact two-body flow over dt in universal variables. Radial collision
/// orbits are continued by reflection; landing inside `guard` of the
/// centre throws ExactCollision.
PhaseState kepler_propagate(double charge, const Vec3& centre, const PhaseState& x, double dt,
                            double guard = 1e-10);

struct AsymptoteData {
  Vec3 p_out = Vec3::Zero();
  Vec3 p_in = Vec3::Zero();
  double deflection = 0.0;  // angle between p_in and p_out
};

/// Asymptotic momenta of the hyperbola described by `el`. Throws NotHyperbolic.
AsymptoteData asymptote_data(const KeplerElements& el);

/// Total time the orbit spends inside the ball |q - s| <= R.
double time_in_ball(const KeplerElements& el, double R);

}  // namespace ncentre
