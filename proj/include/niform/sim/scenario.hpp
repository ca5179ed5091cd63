#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "niform/controller/controller.hpp"
#include "niform/formation/formation.hpp"
#include "niform/graph/topology.hpp"
#include "niform/lti/model_library.hpp"
#include "niform/obstacle/geometry.hpp"

namespace niform::sim {

struct AgentSpec {
  std::string name;
  lti::Vehicle kind = lti::Vehicle::ugv;
  Vec2 initial;
  double yaw0 = 0.0;  // rad
  bool yaw_dynamics = false;
  double radius = 32.0;
  std::optional<double> max_speed;  // cm/s; overrides the per-kind saturation
};

struct ObstacleSpec {
  int id = 0;
  std::string name;
  Polygon polygon;
};

struct YawSettings {
  bool enabled = false;
  std::optional<double> target;  // fixed yaw reference (rad); otherwise heading of motion
  bool corner_turns = false;
  double corner_angle = 0.5235987755982988;  // 30°
  double exit_error = 0.05235987755982988;   // 3°
  double max_turn_time = 20.0;
  std::string model = "ugv_yaw_rate";
};

struct AvoidanceSettings {
  bool enabled = false;
  double fov = 220.0;
  double look_ahead = 100.0;
  double margin = 2.0;
  double group_radius_cap = 150.0;
  std::size_t group_max_members = 3;
};

struct Scenario {
  std::string name;
  std::string description;
  double dt = 0.02;
  double duration = 60.0;
  std::uint64_t seed = 0;
  bool baseline = false;
  std::optional<double> horizon;  // seconds; nullopt = per-channel follower lag ("auto")
  int delay_steps = 0;
  std::string noise_profile = "none";
  double noise_std = 0.0;  // cm

  lti::ModelLibrary models;
  std::vector<AgentSpec> agents;
  graph::NetworkTopology topology;
  int master = 0;
  controller::NiGains gains;
  double reference_transition_time = 0.0;  // > 0 enables rescheduling of the reference gain per leg
  std::vector<controller::Saturation> limits;

  std::vector<Vec2> waypoints;
  double waypoint_radius = 10.0;
  std::optional<double> stop_after_arrival;

  formation::FormationSpec formation;
  double convergence_tol = 5.0;
  double grace_factor = 0.5;
  std::optional<double> ramp_speed;  // cm/s; offsets slew at this speed instead of stepping

  YawSettings yaw;
  std::vector<ObstacleSpec> obstacles;
  AvoidanceSettings avoidance;
};

// Noise profiles by name: "none" → 0 cm, "lab" → 1 cm output std.
double noise_profile_std(const std::string& profile);

Scenario parse_scenario(const std::string& json_text, const std::string& origin = "<string>",
                        const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace niform::sim
