#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "niform/controller/controller.hpp"
#include "niform/obstacle/geometry.hpp"

namespace niform::sim {

struct AgentRow {
  Vec2 position;  // cm
  Vec2 velocity;  // cm/s
  double yaw = 0.0;
  double yaw_rate = 0.0;
  controller::ControlCommand command;  // cm/s, rad/s
};

struct Row {
  std::int64_t step = 0;
  double t = 0.0;
  int waypoint = 0;
  int phase = 0;
  int mode = 0;  // avoidance mode in force
  bool turning = false;
  double residual = 0.0;         // max per-axis residual of the latest transition, cm
  double consensus_error = 0.0;  // max per-axis offset error over slaves, cm
  double clearance = 0.0;        // min obstacle clearance this step, cm (inf without obstacles)
  std::vector<AgentRow> agents;
};

struct Event {
  double t = 0.0;
  std::string kind;
  std::vector<std::pair<std::string, std::string>> fields;
};

struct TransitionRecord {
  double start = 0.0;
  double duration = 0.0;
  std::string cause;             // "waypoint", "avoidance", "restore"
  std::optional<double> settle;  // s after start; band entry that holds until the next transition
  std::optional<double> first_converged;  // s after start; first band entry
};

struct AvoidanceRecord {
  double start = 0.0;
  std::optional<double> end;
  std::string mode;
  std::string strategy;
  std::vector<int> obstacles;  // source obstacle ids
  double path_clearance = 0.0;  // min over robots and event duration of (centre distance − r), cm
  std::optional<double> restored_error;  // max per-axis offset error at the end of the post-event window
};

struct Summary {
  std::string scenario;
  std::string architecture;
  double dt = 0.0;
  std::int64_t steps = 0;
  double final_time = 0.0;
  std::uint64_t seed = 0;
  double noise_std = 0.0;
  bool final_waypoint_reached = false;
  std::optional<double> arrival_time;
  double max_consensus_error = 0.0;
  double relative_rms = 0.0;
  double relative_worst = 0.0;
  double min_clearance = 0.0;      // +inf without obstacles
  double min_separation = 0.0;     // closest pair of non-exempt robots, +inf if none
  bool collision = false;
  bool divergence = false;
  std::string divergence_message;
  std::vector<Vec2> final_positions;
};

class RunLog {
 public:
  std::vector<std::string> agent_names;
  std::vector<Row> rows;
  std::vector<Event> events;
  std::vector<TransitionRecord> transitions;
  std::vector<AvoidanceRecord> avoidance;
  Summary summary;

  // Positions in m and velocities in m/s in the table; the summary keeps cm.
  void write_table(std::ostream& os) const;
  void write_summary(std::ostream& os) const;
  void write_events(std::ostream& os) const;
};

// Fixed-notation number formatting shared by every writer (byte-stable).
std::string fmt_num(double v, int precision = 6);

}  // namespace niform::sim
