#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "ncentre/model.hpp"

namespace ncentre {

struct IntegratorSettings {
  double step = 1e-3;            // base step h
  double energy_tol = 1e-9;      // relative energy budget per trajectory
  double collision_guard = 1e-10;
  int order = 4;                 // 2 (Strang) or 4 (Yoshida triple jump)
  long max_steps = 20'000'000;

  void validate() const;
};

/// Split index for the far field: Kepler drift about the origin with the
/// total charge, everything else treated as perturbation.
inline constexpr int kFarField = -1;

enum class EventKind { Pericentre, CentreSwitch, VirialCrossing };

struct FlowEvent {
  EventKind kind = EventKind::Pericentre;
  double t = 0.0;
  int centre = 0;          // pericentre / new nearest centre; +1 or -1 (outward/inward) for virial crossings
  PhaseState state;        // for pericentres: two-body state with zero radial velocity
  bool collision = false;  // pericentre at the centre itself (L = 0)
};

enum class FlowStatus { Completed, Escaped, StepLimit, CollisionAbort };

struct IntegratorStats {
  long steps = 0;
  long rejections = 0;
  double min_centre_distance = std::numeric_limits<double>::infinity();
  double max_energy_drift = 0.0;  // relative, max |H - H0| / max(1, |H0|)
  double max_step_drift = 0.0;    // relative, largest change of H over one accepted step
};

struct Trajectory {
  std::vector<PhaseState> samples;
  std::vector<int> split_centres;  // split index used for the step leaving each sample
  std::vector<FlowEvent> events;
  IntegratorStats stats;
  FlowStatus status = FlowStatus::Completed;
  double initial_energy = 0.0;

  const PhaseState& back() const { return samples.back(); }
};

/// Stopping rule beyond the final time.
struct StopRule {
  bool on_escape = false;  // stop once escape_check holds in the direction of integration...
  double min_radius = 0.0; // ...and |q| has reached at least this radius
  bool record_events = true;
};

/// argmin_k |q - s_k|, ties to the smallest index.
int nearest_centre(const CentreConfig& cfg, const Vec3& q);

/// Split index used by the integrator at q (nearest centre or kFarField).
int split_index(const CentreConfig& cfg, const Vec3& q);

/// Strang step: half kick by grad W_l, exact two-body drift about centre l
/// (or the far-field origin), half kick.
PhaseState split_step(const CentreConfig& cfg, const PhaseState& x, double h, int l,
                      double guard = 1e-10);

/// Order-2 or order-4 composition of split_step.
PhaseState composed_step(const CentreConfig& cfg, const PhaseState& x, double h, int l, int order,
                         double guard = 1e-10);

/// Integrates to x0.t + duration (negative duration integrates backward).
/// Throws Error(CollisionAbort) or Error(StepLimit).
Trajectory integrate(const CentreConfig& cfg, const PhaseState& x0, double duration,
                     const IntegratorSettings& settings, const StopRule& stop = {});

/// As integrate, but reports aborts through Trajectory::status instead of throwing.
Trajectory integrate_partial(const CentreConfig& cfg, const PhaseState& x0, double duration,
                             const IntegratorSettings& settings, const StopRule& stop = {});

struct RadiusCrossing {
  double t = 0.0;
  PhaseState state;
  int direction = 0;  // +1 outward, -1 inward (in the time direction of the trajectory)
};

/// All crossings of |q| = R between consecutive samples, refined in time.
std::vector<RadiusCrossing> find_radius_crossings(const CentreConfig& cfg, const Trajectory& traj, double R,
                                                  const IntegratorSettings& settings);

/// CSV export: t, q.., p.., H, nearest centre (1-based), min distance.
void write_trajectory_csv(std::ostream& out, const CentreConfig& cfg, const Trajectory& traj);

}  // namespace ncentre
