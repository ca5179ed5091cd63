#include "niform/obstacle/obstacle.hpp"

#include <algorithm>
#include <limits>

#include "niform/error.hpp"

namespace niform::obstacle {

ObstacleCircle circle_from_polygon(const Polygon& polygon, std::vector<int> members) {
  if (polygon.empty()) throw Error("circle_from_polygon: empty polygon");
  const Vec2 c = area_centroid(polygon).value_or(vertex_centroid(polygon));
  double r = 0.0;
  for (const auto& v : polygon) r = std::max(r, distance(c, v));
  std::sort(members.begin(), members.end());
  return {c, r, std::move(members)};
}

ObstacleCircle circle_from_observation(const BoundaryObservation& obs) {
  return circle_from_polygon(obs.polygon, {obs.obstacle_id});
}

std::optional<BoundaryObservation> observe(int obstacle_id, const Polygon& polygon, Vec2 sensor,
                                           double footprint_radius) {
  Polygon clipped = clip_to_disc(polygon, sensor, footprint_radius);
  if (clipped.size() < 3 || std::abs(signed_area(clipped)) < 1e-9) return std::nullopt;
  return BoundaryObservation{obstacle_id, std::move(clipped), sensor, footprint_radius};
}

ObstacleCircle enclosing_circle(const ObstacleCircle& c1, const ObstacleCircle& c2) {
  const double d = distance(c1.center, c2.center);
  std::vector<int> members = c1.members;
  members.insert(members.end(), c2.members.begin(), c2.members.end());
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (d + c2.radius <= c1.radius) return {c1.center, c1.radius, members};
  if (d + c1.radius <= c2.radius) return {c2.center, c2.radius, members};
  const double R = 0.5 * (d + c1.radius + c2.radius);
  const Vec2 u = (c2.center - c1.center) / d;
  return {c1.center + u * (R - c1.radius), R, members};
}

std::optional<ObstacleCircle> group_or_separate(const ObstacleCircle& c1,
                                                const ObstacleCircle& c2, double d) {
  if (!(d > 0.0)) throw Error("group_or_separate: robot diameter must be > 0");
  if (distance(c1.center, c2.center) < d + c1.radius + c2.radius) return enclosing_circle(c1, c2);
  return std::nullopt;
}

std::vector<ObstacleCircle> group_obstacles(std::vector<ObstacleCircle> circles, double d,
                                            const GroupingLimits& limits) {
  for (;;) {
    double best_gap = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    std::optional<ObstacleCircle> best;
    for (std::size_t i = 0; i < circles.size(); ++i)
      for (std::size_t j = i + 1; j < circles.size(); ++j) {
        auto g = group_or_separate(circles[i], circles[j], d);
        if (!g || g->radius > limits.radius_cap || g->members.size() > limits.max_members) continue;
        const double gap = distance(circles[i].center, circles[j].center) - circles[i].radius -
                           circles[j].radius;
        if (gap < best_gap) {
          best_gap = gap;
          bi = i;
          bj = j;
          best = std::move(g);
        }
      }
    if (!best) break;
    circles.erase(circles.begin() + static_cast<std::ptrdiff_t>(bj));
    circles[bi] = std::move(*best);
  }
  std::sort(circles.begin(), circles.end(), [](const auto& a, const auto& b) {
    return a.members < b.members;
  });
  return circles;
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::none: return "none";
    case Mode::single: return "single";
    case Mode::facing: return "facing";
  }
  return "none";
}

std::string to_string(FacingCase c) {
  switch (c) {
    case FacingCase::none: return "none";
    case FacingCase::pass: return "pass";
    case FacingCase::squeeze: return "squeeze";
    case FacingCase::queue: return "queue";
  }
  return "none";
}

bool threatens(const ObstacleCircle& o, const RobotCircle& robot, Vec2 heading, double look_ahead) {
  const Vec2 end = robot.center + heading.normalized() * look_ahead;
  return point_segment_distance(o.center, robot.center, end) < o.radius + robot.radius;
}

namespace {

struct Frame {
  Vec2 f, n;
  double lat(Vec2 p) const { return dot(p, n); }
  double along(Vec2 p) const { return dot(p, f); }
};

Frame frame_of(const Scene& s) {
  const Vec2 f = s.heading.normalized();
  return {f, f.perp()};
}

// Slave line SC1–SC2: through the laterally outermost slaves, or through the
// master along the normal when there are fewer than two slaves.
struct SlaveLine {
  Vec2 point, dir;
  double width = 0.0;
  double r_lo = 0.0, r_hi = 0.0;
};

SlaveLine slave_line(const Scene& s, const Frame& fr) {
  const auto& m = s.robots[static_cast<std::size_t>(s.master)];
  if (s.slaves.size() < 2) {
    const double r = s.slaves.empty() ? m.radius
                                      : s.robots[static_cast<std::size_t>(s.slaves[0])].radius;
    const Vec2 p = s.slaves.empty() ? m.center : s.robots[static_cast<std::size_t>(s.slaves[0])].center;
    return {p, fr.n, 0.0, r, r};
  }
  auto lo = s.slaves.front(), hi = s.slaves.front();
  for (int i : s.slaves) {
    const auto& c = s.robots[static_cast<std::size_t>(i)].center;
    if (fr.lat(c) < fr.lat(s.robots[static_cast<std::size_t>(lo)].center)) lo = i;
    if (fr.lat(c) > fr.lat(s.robots[static_cast<std::size_t>(hi)].center)) hi = i;
  }
  const auto& a = s.robots[static_cast<std::size_t>(lo)];
  const auto& b = s.robots[static_cast<std::size_t>(hi)];
  Vec2 dir = b.center - a.center;
  if (dir.norm() == 0.0) dir = fr.n;
  return {a.center, dir.normalized(), distance(a.center, b.center), a.radius, b.radius};
}

void corridor(const Scene& s, const Frame& fr, AvoidanceEvent& ev) {
  const auto& m = s.robots[static_cast<std::size_t>(s.master)];
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : s.robots) {
    lo = std::min(lo, fr.lat(r.center) - r.radius);
    hi = std::max(hi, fr.lat(r.center) + r.radius);
  }
  const double base = fr.lat(m.center);
  ev.SD1 = m.center + fr.n * (lo - base);
  ev.SD2 = m.center + fr.n * (hi - base);
}

}  // namespace

AvoidanceEvent detect_mode(const Scene& s) {
  AvoidanceEvent ev;
  if (s.robots.empty() || s.obstacles.empty()) return ev;
  const Frame fr = frame_of(s);
  const auto& m = s.robots[static_cast<std::size_t>(s.master)];
  corridor(s, fr, ev);

  // Threats per obstacle.
  std::vector<std::vector<int>> threat(s.obstacles.size());
  for (std::size_t o = 0; o < s.obstacles.size(); ++o)
    for (std::size_t r = 0; r < s.robots.size(); ++r) {
      const auto& oc = s.obstacles[o];
      const auto& rc = s.robots[r];
      if (distance(oc.center, rc.center) - oc.radius > s.fov / 2.0) continue;
      if (threatens(oc, rc, fr.f, s.look_ahead)) threat[o].push_back(static_cast<int>(r));
    }

  // Facing pair: nearest obstacle ahead on each side inside the master footprint.
  int left = -1, right = -1;
  double left_d = 0.0, right_d = 0.0;
  const double mlat = fr.lat(m.center), malong = fr.along(m.center);
  for (std::size_t o = 0; o < s.obstacles.size(); ++o) {
    const auto& oc = s.obstacles[o];
    if (fr.along(oc.center) + oc.radius <= malong) continue;
    const double dm = distance(oc.center, m.center) - oc.radius;
    if (dm > s.fov / 2.0) continue;
    const double side = fr.lat(oc.center) - mlat;
    if (side > 0.0 && (left < 0 || dm < left_d)) {
      left = static_cast<int>(o);
      left_d = dm;
    } else if (side < 0.0 && (right < 0 || dm < right_d)) {
      right = static_cast<int>(o);
      right_d = dm;
    }
  }
  const bool any_threat = std::any_of(threat.begin(), threat.end(), [](const auto& t) { return !t.empty(); });
  if (left >= 0 && right >= 0) {
    const auto& o1 = s.obstacles[static_cast<std::size_t>(right)];
    const auto& o2 = s.obstacles[static_cast<std::size_t>(left)];
    const Vec2 u = (o2.center - o1.center).normalized();
    ev.A = o1.center + u * o1.radius;
    ev.B = o2.center - u * o2.radius;
    ev.C = (o1.center + o2.center) / 2.0;
    const SlaveLine sl = slave_line(s, fr);
    ev.SP1 = project_onto_line(*ev.A, sl.point, sl.dir);
    ev.SP2 = project_onto_line(*ev.B, sl.point, sl.dir);
    // Overlapping circles leave no gap at all.
    const double gap = dot(*ev.SP2 - *ev.SP1, fr.n) > 0.0 ? distance(*ev.SP1, *ev.SP2) : 0.0;
    const double R1 = m.radius, D1 = m.diameter();
    if (gap > sl.width + sl.r_lo + sl.r_hi)
      ev.facing = FacingCase::pass;
    else if (D1 + R1 + sl.r_lo < gap)
      ev.facing = FacingCase::squeeze;
    else
      ev.facing = FacingCase::queue;
    // A wide corridor keeps the formation; a robot still on a collision line
    // inside it is handled as a single-obstacle threat below.
    if (ev.facing != FacingCase::pass || !any_threat) {
      ev.mode = Mode::facing;
      ev.obstacles = {right, left};
      for (int o : ev.obstacles)
        for (int r : threat[static_cast<std::size_t>(o)])
          if (std::find(ev.threatened.begin(), ev.threatened.end(), r) == ev.threatened.end())
            ev.threatened.push_back(r);
      std::sort(ev.threatened.begin(), ev.threatened.end());
      return ev;
    }
    ev.facing = FacingCase::none;
    ev.A.reset();
    ev.B.reset();
    ev.C.reset();
    ev.SP1.reset();
    ev.SP2.reset();
  }

  // Single obstacle.
  std::vector<int> threats;
  for (std::size_t o = 0; o < threat.size(); ++o)
    if (!threat[o].empty()) threats.push_back(static_cast<int>(o));
  if (threats.empty()) return ev;
  int pick = threats.front();
  double best = std::numeric_limits<double>::infinity();
  for (int o : threats) {
    const double d = distance(s.obstacles[static_cast<std::size_t>(o)].center, m.center);
    if (d < best) {
      best = d;
      pick = o;
    }
  }
  const auto& oc = s.obstacles[static_cast<std::size_t>(pick)];
  bool isolated = true;
  for (std::size_t o = 0; o < s.obstacles.size(); ++o)
    if (static_cast<int>(o) != pick && distance(s.obstacles[o].center, oc.center) <= s.fov / 2.0)
      isolated = false;
  ev.mode = Mode::single;
  ev.fallback = !isolated || threats.size() > 1;
  ev.obstacles = {pick};
  ev.threatened = threat[static_cast<std::size_t>(pick)];
  return ev;
}

namespace {

double side_of(double value, double reference, double fallback) {
  if (value > reference) return 1.0;
  if (value < reference) return -1.0;
  return fallback >= 0.0 ? 1.0 : -1.0;
}

}  // namespace

std::optional<AvoidancePlan> single_obstacle_plan(const Scene& s, AvoidanceEvent& ev,
                                                  const PlanConfig& cfg) {
  if (ev.mode != Mode::single || ev.obstacles.empty()) throw Error("single_obstacle_plan: not a mode-1 event");
  const Frame fr = frame_of(s);
  const auto& oc = s.obstacles[static_cast<std::size_t>(ev.obstacles.front())];
  const auto& m = s.robots[static_cast<std::size_t>(s.master)];
  const std::size_t n = s.robots.size();

  // The threatened robots' motion lines must actually reach the enlarged circle.
  std::vector<int> on_path;
  for (int r : ev.threatened) {
    const auto& rc = s.robots[static_cast<std::size_t>(r)];
    const auto hit = line_circle(rc.center, fr.f, oc.center, oc.radius + rc.radius);
    if (hit && hit->second >= 0.0) on_path.push_back(r);
  }
  if (on_path.empty()) {
    ev.mode = Mode::none;
    return std::nullopt;
  }
  ev.threatened = on_path;

  AvoidancePlan plan;
  plan.robot_lateral.assign(n, std::nullopt);
  plan.hold_lateral.assign(n, false);
  const SlaveLine sl = slave_line(s, fr);
  const double olat = fr.lat(oc.center);
  const bool master_hit = std::find(on_path.begin(), on_path.end(), s.master) != on_path.end();

  if (master_hit) {
    const double sgn = side_of(fr.lat(m.center), olat, 1.0);
    ev.A = oc.center + fr.n * (sgn * oc.radius);
    ev.SP1 = project_onto_line(*ev.A, sl.point, sl.dir);
    plan.master_detour = true;
    plan.master_lateral = olat + sgn * (oc.radius + m.radius + cfg.margin);
    plan.strategy = "master";
    for (int i : s.slaves) plan.hold_lateral[static_cast<std::size_t>(i)] = true;
  } else {
    plan.strategy = "slave";
  }

  for (int r : on_path) {
    if (r == s.master) continue;
    const auto& rc = s.robots[static_cast<std::size_t>(r)];
    const double mref = plan.master_lateral.value_or(fr.lat(m.center));
    double sgn = side_of(fr.lat(rc.center), olat, fr.lat(rc.center) - mref);
    auto target = [&](double sg) { return olat + sg * (oc.radius + rc.radius + cfg.margin); };
    // Do not park a slave abreast of the master.
    const bool abreast = std::abs(fr.along(rc.center) - fr.along(m.center)) < rc.radius + m.radius;
    if (abreast && std::abs(target(sgn) - mref) < rc.radius + m.radius + cfg.margin) sgn = -sgn;
    plan.robot_lateral[static_cast<std::size_t>(r)] = target(sgn);
    plan.hold_lateral[static_cast<std::size_t>(r)] = false;
    if (!ev.A) {
      ev.A = oc.center + fr.n * (sgn * oc.radius);
      ev.SP1 = project_onto_line(*ev.A, sl.point, sl.dir);
    }
  }
  return plan;
}

AvoidancePlan facing_obstacles_plan(const Scene& s, AvoidanceEvent& ev, const PlanConfig& cfg) {
  if (ev.mode != Mode::facing || ev.obstacles.size() != 2 || !ev.SP1 || !ev.SP2 || !ev.C)
    throw Error("facing_obstacles_plan: not a mode-2 event");
  const Frame fr = frame_of(s);
  const std::size_t n = s.robots.size();
  AvoidancePlan plan;
  plan.robot_lateral.assign(n, std::nullopt);
  plan.hold_lateral.assign(n, false);
  if (ev.facing == FacingCase::pass) {
    plan.strategy = "pass";
    return plan;
  }
  if (ev.facing == FacingCase::queue) {
    plan.strategy = "queue";
    plan.unsupported = true;
    return plan;
  }
  plan.strategy = "squeeze";
  const double a = fr.lat(*ev.SP1), b = fr.lat(*ev.SP2);
  const double lo_edge = std::min(a, b), hi_edge = std::max(a, b);
  plan.master_detour = true;
  plan.master_lateral = fr.lat(*ev.C);
  for (int i : s.slaves) {
    const auto& rc = s.robots[static_cast<std::size_t>(i)];
    const double lo = lo_edge + rc.radius + cfg.margin, hi = hi_edge - rc.radius - cfg.margin;
    const double cur = fr.lat(rc.center);
    const double tgt = lo > hi ? 0.5 * (lo + hi) : std::clamp(cur, lo, hi);
    if (tgt != cur) plan.robot_lateral[static_cast<std::size_t>(i)] = tgt;
  }
  // Clamping can stack slaves on the same lateral; spread them back apart,
  // centred in the gap, so they still clear each other.
  std::vector<std::pair<double, int>> order;
  for (int i : s.slaves) {
    const auto k = static_cast<std::size_t>(i);
    order.emplace_back(plan.robot_lateral[k].value_or(fr.lat(s.robots[k].center)), i);
  }
  std::sort(order.begin(), order.end());
  bool stacked = false;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double need = s.robots[static_cast<std::size_t>(order[k - 1].second)].radius +
                        s.robots[static_cast<std::size_t>(order[k].second)].radius + cfg.margin;
    stacked = stacked || order[k].first - order[k - 1].first < need;
  }
  if (stacked) {
    double span = 0.0;
    for (std::size_t k = 1; k < order.size(); ++k)
      span += s.robots[static_cast<std::size_t>(order[k - 1].second)].radius +
              s.robots[static_cast<std::size_t>(order[k].second)].radius + cfg.margin;
    double at = 0.5 * (lo_edge + hi_edge) - 0.5 * span;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k > 0)
        at += s.robots[static_cast<std::size_t>(order[k - 1].second)].radius +
              s.robots[static_cast<std::size_t>(order[k].second)].radius + cfg.margin;
      plan.robot_lateral[static_cast<std::size_t>(order[k].second)] = at;
    }
  }
  return plan;
}

}  // namespace niform::obstacle
