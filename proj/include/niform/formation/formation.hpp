#pragma once

#include <optional>
#include <span>
#include <vector>

#include "niform/obstacle/geometry.hpp"

namespace niform::formation {

// Offsets are positions relative to the reference (master) agent, one entry
// per agent; the master's own entry is (0, 0).
struct Phase {
  int trigger = 0;  // waypoint index at which the phase becomes active
  std::vector<Vec2> offsets;
  std::vector<double> yaw_offsets;  // rad, optional (empty = zeros)
  double duration = 2.0;            // transition time into this phase, s
};

class FormationSpec {
 public:
  FormationSpec() = default;
  // Sorted by trigger; throws on empty tables, non-positive durations,
  // non-finite or wrongly-sized offsets.
  FormationSpec(std::vector<Phase> phases, std::size_t n_agents, int master);

  const std::vector<Phase>& phases() const { return phases_; }
  std::size_t n_agents() const { return n_; }
  int master() const { return master_; }
  // Latest phase whose trigger ≤ waypoint_index (phase 0 before that).
  std::size_t phase_index(int waypoint_index) const;

 private:
  std::vector<Phase> phases_;
  std::size_t n_ = 0;
  int master_ = 0;
};

struct TransitionState {
  bool active = false;
  double start_time = 0.0;
  double duration = 0.0;
  std::vector<Vec2> from, to;
  std::vector<Vec2> dis;            // to − from, frozen at activation
  std::vector<bool> participates;   // dis ≠ 0
  double dest() const { return start_time + duration; }
};

TransitionState begin_transition(std::vector<Vec2> from, std::vector<Vec2> to, double start_time,
                                 double duration);

// dis_i / t. Throws when the transition is inactive or t ≤ 0.
std::vector<Vec2> transition_velocities(const TransitionState& tr);

enum class Convergence { converged, in_progress, timed_out };

struct ConvergenceReport {
  Convergence status = Convergence::in_progress;
  std::vector<Vec2> residual;  // (p′_i + dis_i) − p_i in the master frame
  double max_abs = 0.0;        // largest per-axis |residual| over participants
};

/**
 * Per-agent residual of the time-varying formation condition: agent i's
 * target is master + new offset. Converged when every participating agent is
 * within `tol` per axis; timed out once `time` passes dest + grace_factor·t.
 */
ConvergenceReport check_convergence(std::span<const Vec2> positions, int master,
                                    const TransitionState& tr, double time, double tol = 5.0,
                                    double grace_factor = 0.5);

// Offsets in force: avoidance override > waypoint phase > phase 0.
const std::vector<Vec2>& phase_for(const FormationSpec& spec, double time, int waypoint_index,
                                   const std::optional<std::vector<Vec2>>& avoidance);

}  // namespace niform::formation
