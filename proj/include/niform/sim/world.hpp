#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "niform/controller/controller.hpp"
#include "niform/formation/formation.hpp"
#include "niform/lti/discrete_plant.hpp"
#include "niform/obstacle/obstacle.hpp"
#include "niform/sim/run_log.hpp"
#include "niform/sim/scenario.hpp"

namespace niform::sim {

// Group delay −T'(0)/T(0) of the follower loop T = P|K| / (1 + P|K|): the
// lag with which a loop tracks a ramp, used for the "auto" prediction horizon.
double follower_lag(const lti::TransferFunction& plant, double gain);

struct Overrides {
  std::optional<bool> baseline;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> noise_profile;
};

Scenario apply_overrides(Scenario s, const Overrides& o);

/**
 * Fixed-step closed loop. Each step: read plant outputs → waypoint, corner-turn,
 * formation and avoidance bookkeeping → controller → saturation → log row →
 * plant update. Plants are realized about each agent's initial pose (world
 * position = initial + plant output).
 */
class World {
 public:
  explicit World(Scenario scenario);

  bool done() const;
  // Throws DivergenceError on a non-finite state.
  void step();

  double time() const { return t_; }
  std::int64_t step_index() const { return k_; }
  int waypoint_index() const { return wp_; }
  bool arrived() const { return arrived_; }
  bool turning() const { return turning_; }
  const Scenario& scenario() const { return sc_; }
  const controller::NiGains& gains() const { return gains_; }
  const std::vector<double>& horizons() const { return horizons_; }
  std::vector<controller::AgentSnapshot> true_states() const;
  const RunLog& log() const { return log_; }

  // Closes open records and fills the summary.
  RunLog finish(bool diverged = false, const std::string& why = {});

 private:
  struct Agent {
    lti::DiscretePlant px, py;
    std::optional<lti::DiscretePlant> yaw;
    Vec2 origin;
    double yaw0 = 0.0;
  };

  struct ActiveEvent {
    obstacle::Mode mode = obstacle::Mode::none;
    std::vector<std::vector<int>> members;  // grouped-circle member ids per event obstacle
    obstacle::Scene scene;                  // robots frozen at trigger time
    obstacle::AvoidanceEvent ev;
    obstacle::AvoidancePlan plan;
    std::vector<std::optional<double>> lateral;  // per robot, world lateral coordinate
    Vec2 f, n;
    std::size_t record = 0;
  };

  void event(std::string kind, std::vector<std::pair<std::string, std::string>> fields = {});
  static std::vector<Vec2> positions(const std::vector<controller::AgentSnapshot>& s);
  double max_radius() const;
  void advance_waypoint(const std::vector<controller::AgentSnapshot>& now);
  void start_transition(const std::vector<Vec2>& from, const std::vector<Vec2>& to,
                        double duration, const std::string& cause,
                        const std::vector<controller::AgentSnapshot>& meas);
  void close_transition();
  void reschedule_reference(Vec2 leg, Vec2 master_pos);
  std::vector<obstacle::ObstacleCircle> estimated_circles() const;
  obstacle::Scene make_scene(const std::vector<Vec2>& robots, Vec2 heading,
                             std::vector<obstacle::ObstacleCircle> circles) const;
  bool try_activate(const std::vector<controller::AgentSnapshot>& now,
                    const std::vector<controller::AgentSnapshot>& meas);
  void apply_plan(const obstacle::AvoidancePlan& plan);
  void refresh_event();
  // Ground-truth grouped circles sharing a member with the active event.
  std::vector<obstacle::ObstacleCircle> event_truth() const;
  // Every event obstacle is behind each displaced robot by r + R along the travel direction.
  bool event_cleared(const std::vector<controller::AgentSnapshot>& now) const;
  void close_restore_window();
  // Phase offsets with the active event's lateral targets substituted.
  std::vector<Vec2> effective_offsets(Vec2 master_pos) const;
  Vec2 reference_point() const;

  Scenario sc_;
  std::vector<Agent> agents_;
  std::int64_t k_ = 0;
  double t_ = 0.0;
  int wp_ = 0;
  bool arrived_ = false;
  std::optional<double> arrival_t_;

  std::size_t phase_ = 0;
  std::vector<Vec2> offsets_;
  std::vector<Vec2> commanded_offsets_;  // slewed copy when a ramp speed is set
  std::vector<double> yaw_offsets_;
  controller::NiGains gains_;
  std::vector<double> horizons_;  // per agent, s
  std::deque<Vec2> master_velocity_queue_;

  std::optional<formation::TransitionState> tr_;
  std::optional<double> in_band_since_;

  bool turning_ = false;
  double turn_start_ = 0.0;
  double turn_target_ = 0.0;
  std::vector<Vec2> hold_;  // station-keeping positions during a corner turn
  double heading_prev_ = 0.0;
  Vec2 travel_dir_{0.0, 1.0};

  std::vector<std::optional<obstacle::BoundaryObservation>> memory_;
  std::vector<double> memory_area_;
  std::vector<obstacle::ObstacleCircle> polygon_circles_;  // one per obstacle, full boundary
  std::vector<obstacle::ObstacleCircle> truth_;            // the same, grouped
  std::optional<ActiveEvent> event_;
  std::optional<std::size_t> restore_window_;
  std::set<std::string> noted_;

  double last_residual_ = 0.0;
  bool obstacle_hit_ = false;
  double rel_sq_sum_ = 0.0;
  std::int64_t rel_count_ = 0;
  RunLog log_;
};

// Runs to completion. Divergence is reported in the summary, not thrown.
RunLog run(const Scenario& scenario);

struct ComparisonRow {
  std::string metric;
  double enhanced = 0.0;
  double baseline = 0.0;
};

struct Comparison {
  RunLog enhanced;
  RunLog baseline;
  std::vector<ComparisonRow> rows;
};

// Enhanced and baseline runs of the same scenario and seed, run concurrently.
Comparison compare(const Scenario& scenario);

}  // namespace niform::sim
