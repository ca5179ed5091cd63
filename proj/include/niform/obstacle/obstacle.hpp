#pragma once

#include <optional>
#include <string>
#include <vector>

#include "niform/obstacle/geometry.hpp"

namespace niform::obstacle {

struct ObstacleCircle {
  Vec2 center;
  double radius = 0.0;
  std::vector<int> members;  // source obstacle ids, sorted
};

struct RobotCircle {
  Vec2 center;
  double radius = 0.0;
  double diameter() const { return 2.0 * radius; }
};

// Visible part of one obstacle inside a robot's sensor disc.
struct BoundaryObservation {
  int obstacle_id = 0;
  Polygon polygon;
  Vec2 sensor;
  double footprint_radius = 0.0;
};

// Centre = area centroid, radius = farthest vertex. Zero-area polygons fall
// back to the vertex centroid.
ObstacleCircle circle_from_polygon(const Polygon& polygon, std::vector<int> members = {});
ObstacleCircle circle_from_observation(const BoundaryObservation& obs);

// Clip `polygon` to the sensor disc; nullopt when fewer than 3 vertices or
// no area remain.
std::optional<BoundaryObservation> observe(int obstacle_id, const Polygon& polygon, Vec2 sensor,
                                           double footprint_radius);

// Smallest circle containing both.
ObstacleCircle enclosing_circle(const ObstacleCircle& c1, const ObstacleCircle& c2);

// Grouped circle when the gap cannot pass a robot of diameter d
// (dis12 < d + r1 + r2), otherwise nullopt.
std::optional<ObstacleCircle> group_or_separate(const ObstacleCircle& c1,
                                                const ObstacleCircle& c2, double d);

struct GroupingLimits {
  double radius_cap = 150.0;
  std::size_t max_members = 3;
};

// Merges pairs to a fixpoint, closest gap first; merges that would exceed
// the limits are skipped. Output sorted by first member id.
std::vector<ObstacleCircle> group_obstacles(std::vector<ObstacleCircle> circles, double d,
                                            const GroupingLimits& limits = {});

enum class Mode { none = 0, single = 1, facing = 2 };
enum class FacingCase { none = 0, pass = 1, squeeze = 2, queue = 3 };
std::string to_string(Mode m);
std::string to_string(FacingCase c);

// Snapshot consumed by detect_mode. Robot 0..n-1; `master` indexes robots.
struct Scene {
  std::vector<RobotCircle> robots;
  int master = 0;
  std::vector<int> slaves;
  Vec2 heading{0.0, 1.0};  // unit direction of travel
  std::vector<ObstacleCircle> obstacles;  // already grouped
  double fov = 220.0;
  double look_ahead = 100.0;
};

struct AvoidanceEvent {
  Mode mode = Mode::none;
  FacingCase facing = FacingCase::none;
  std::vector<int> obstacles;   // indices into Scene::obstacles
  std::vector<int> threatened;  // robot indices
  bool fallback = false;        // several threats; nearest treated as single
  std::optional<Vec2> A, B, SP1, SP2, C, SD1, SD2;
};

// Robot i threatened by circle o: o's centre lies within r + R_i of the
// segment from SC_i to SC_i + look_ahead·heading.
bool threatens(const ObstacleCircle& o, const RobotCircle& robot, Vec2 heading, double look_ahead);

AvoidanceEvent detect_mode(const Scene& scene);

// Result of planning: lateral coordinates (along the left normal of the
// scene heading) the robots should hold while the event lasts.
struct AvoidancePlan {
  bool master_detour = false;
  std::optional<double> master_lateral;
  std::vector<std::optional<double>> robot_lateral;  // per robot; nullopt = unchanged
  std::vector<bool> hold_lateral;                    // per robot: keep current lateral
  bool unsupported = false;                          // queue sub-case
  std::string strategy;                              // "slave", "master", "squeeze", "pass"
};

struct PlanConfig {
  double margin = 2.0;  // added to the robot radius
};

// Strategy 1 (slave threatened) and strategy 2 (master threatened).
// Returns nullopt when the threatened robot's motion line misses the circle
// enlarged by its radius (mode downgrades to none).
std::optional<AvoidancePlan> single_obstacle_plan(const Scene& scene, AvoidanceEvent& event,
                                                  const PlanConfig& cfg = {});

// Squeeze between two facing obstacles; pass keeps the formation, queue is
// reported unsupported.
AvoidancePlan facing_obstacles_plan(const Scene& scene, AvoidanceEvent& event,
                                    const PlanConfig& cfg = {});

}  // namespace niform::obstacle
