#pragma once

#include <span>
#include <vector>

#include "niform/graph/topology.hpp"
#include "niform/lti/transfer_function.hpp"
#include "niform/obstacle/geometry.hpp"

namespace niform::controller {

struct AxisGains {
  double x = 0.0;
  double y = 0.0;
};

/**
 * Controller gains in 1/s (rad/s per rad for yaw). `consensus` is indexed by
 * agent; an agent's entry applies to every edge whose tail it is.
 */
struct NiGains {
  AxisGains reference;
  std::vector<AxisGains> consensus;
  double reference_yaw = 0.0;
  double consensus_yaw = 0.0;
  bool adaptive = false;
};

struct ControlCommand {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
};

struct Prediction {
  double p_xf = 0.0;
  double p_yf = 0.0;
};

struct Saturation {
  double v_max = 100.0;
  double omega_max = 1.5;
};

struct AgentSnapshot {
  Vec2 position;
  Vec2 velocity;
  double yaw = 0.0;
  double yaw_rate = 0.0;
};

// (V·dt) for the master's broadcast velocity.
Prediction predict_master(Vec2 master_velocity, double dt);

// The prediction path seen by a slave loop as a transfer function on the
// master position: −dt·s (the consensus tail sign negates V·dt).
lti::TransferFunction prediction_term(double dt);

struct ControlInputs {
  const graph::NetworkTopology& topology;
  const NiGains& gains;
  std::span<const AgentSnapshot> agents;
  std::span<const Vec2> offsets;  // desired position of each agent relative to the reference agent
  Vec2 reference;                 // X_r: the negated waypoint
  double horizon = 0.0;           // prediction horizon, s
  std::span<const Saturation> limits;
  std::span<const double> agent_horizon = {};  // per tail agent; overrides `horizon` when nonempty
};

/**
 * Enhanced law, evaluated per agent:
 *   reference agent:  u = Kr ∘ (X_r + X_i)
 *   tail of edge e:   u = Q_c(t,e)·Kc_t ∘ (X_f,e + X_head − X_tail + V_head·h)
 * with Q_c(t,e) = −1, X_f,e = offset(tail) − offset(head). Saturated per axis.
 */
std::vector<ControlCommand> enhanced_control(const ControlInputs& in);

// Original architecture through the stacked matrices
//   ȳ = ([Q_i Q_r]⊗I₂)ᵀ y,  e_f = ȳ + [X_f; X_r],  u = ([Q_c Q_r]⊗I₂) K e_f
// (no prediction; `horizon` is ignored).
std::vector<ControlCommand> baseline_control(const ControlInputs& in);

struct YawInputs {
  const graph::NetworkTopology& topology;
  const NiGains& gains;
  std::span<const AgentSnapshot> agents;
  std::span<const double> yaw_offsets;  // desired yaw relative to the reference agent, rad
  double yaw_target = 0.0;              // Ω_r = −yaw_target
  double horizon = 0.0;
  std::span<const bool> has_yaw;        // agents with yaw dynamics
  std::span<const Saturation> limits;
};

// Yaw-rate commands; agents without yaw dynamics (and edges touching them)
// are skipped and get 0. Angle errors are wrapped to (−π, π].
std::vector<double> yaw_consensus(const YawInputs& in);

// atan2 of the displacement; `previous` when the displacement is zero.
double heading_from_motion(Vec2 setpoint, Vec2 current, double previous);

double wrap_angle(double a);

struct AdaptiveRequest {
  double duration = 0.0;              // t, s
  std::vector<Vec2> displacement;     // dis_i per agent
  std::vector<Vec2> start_error;      // consensus error of agent i at transition start
  std::vector<bool> participates;     // agents rescheduled by this transition
  bool reference_leg = false;         // also reschedule the reference gain (agent `reference_agent`)
  int reference_agent = 0;
};

// Gains whose command magnitude at transition start equals |dis|/t. Axes with
// zero displacement or zero start error keep their base gain.
NiGains adaptive_gains(const NiGains& base, const AdaptiveRequest& req);

}  // namespace niform::controller
