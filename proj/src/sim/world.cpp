#include "niform/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "niform/error.hpp"
#include "niform/lti/frequency.hpp"

namespace niform::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDivergenceBound = 1e7;  // cm

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t plant_seed(std::uint64_t seed, std::size_t agent, int axis) {
  return splitmix(seed ^ splitmix(agent * 4 + static_cast<std::uint64_t>(axis) + 1));
}

double max_axis(Vec2 v) { return std::max(std::abs(v.x), std::abs(v.y)); }

// Angle plant: yaw-rate model followed by an integrator.
lti::TransferFunction yaw_angle_model(const lti::ModelLibrary& lib, const std::string& name) {
  const auto& rate = lib.get(name).tf;
  const auto cls = lti::classify_ni(rate, lti::FrequencyGrid::standard());
  if (cls.kind != lti::NiClass::sni)
    throw ScenarioError("/yaw/model", "yaw-rate model '" + name + "' does not classify SNI");
  return rate * lti::TransferFunction({1.0}, {1.0, 0.0});
}

}  // namespace

World::World(Scenario scenario) : sc_(std::move(scenario)) {
  const std::size_t n = sc_.agents.size();
  if (n == 0) throw ScenarioError("/agents", "no agents");
  if (sc_.waypoints.empty()) throw ScenarioError("/waypoints", "no waypoints");

  std::optional<lti::TransferFunction> yaw_tf;
  if (sc_.yaw.enabled) yaw_tf = yaw_angle_model(sc_.models, sc_.yaw.model);

  agents_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = sc_.agents[i];
    const auto& mx = sc_.models.channel(a.kind, "velx").tf;
    const auto& my = sc_.models.channel(a.kind, "vely").tf;
    Agent ag{lti::DiscretePlant(mx, sc_.dt, sc_.noise_std, plant_seed(sc_.seed, i, 0)),
             lti::DiscretePlant(my, sc_.dt, sc_.noise_std, plant_seed(sc_.seed, i, 1)),
             std::nullopt, a.initial, a.yaw0};
    if (yaw_tf && a.yaw_dynamics) ag.yaw.emplace(*yaw_tf, sc_.dt);
    agents_.push_back(std::move(ag));
  }

  gains_ = sc_.gains;
  phase_ = sc_.formation.phase_index(0);
  offsets_ = sc_.formation.phases()[phase_].offsets;
  yaw_offsets_ = sc_.formation.phases()[phase_].yaw_offsets;
  yaw_offsets_.resize(n, 0.0);

  horizons_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<int>(i) == sc_.master) continue;
    if (sc_.horizon) {
      horizons_[i] = *sc_.horizon;
      continue;
    }
    const auto kind = sc_.agents[i].kind;
    const auto& k = sc_.gains.consensus[i];
    horizons_[i] = 0.5 * (follower_lag(sc_.models.channel(kind, "velx").tf, k.x) +
                          follower_lag(sc_.models.channel(kind, "vely").tf, k.y));
  }

  memory_.assign(sc_.obstacles.size(), std::nullopt);
  memory_area_.assign(sc_.obstacles.size(), 0.0);
  std::vector<obstacle::ObstacleCircle> truth;
  for (const auto& o : sc_.obstacles)
    truth.push_back(obstacle::circle_from_polygon(o.polygon, {o.id}));
  polygon_circles_ = truth;
  truth_ = obstacle::group_obstacles(std::move(truth), 2.0 * max_radius(),
                                     {sc_.avoidance.group_radius_cap,
                                      sc_.avoidance.group_max_members});

  const Vec2 m0 = sc_.agents[static_cast<std::size_t>(sc_.master)].initial;
  heading_prev_ = sc_.agents[static_cast<std::size_t>(sc_.master)].yaw0;
  travel_dir_ = (sc_.waypoints.front() - m0).normalized();
  if (travel_dir_ == Vec2{}) travel_dir_ = {std::cos(heading_prev_), std::sin(heading_prev_)};

  log_.summary.min_clearance = kInf;
  log_.summary.min_separation = kInf;
  log_.agent_names.reserve(n);
  for (const auto& a : sc_.agents) log_.agent_names.push_back(a.name);

  if (gains_.adaptive && sc_.reference_transition_time > 0.0)
    reschedule_reference(sc_.waypoints.front() - m0, m0);
}

double World::max_radius() const {
  double r = 0.0;
  for (const auto& a : sc_.agents) r = std::max(r, a.radius);
  return r;
}

bool World::done() const {
  if (t_ > sc_.duration + 1e-9) return true;
  return sc_.stop_after_arrival && arrival_t_ && t_ > *arrival_t_ + *sc_.stop_after_arrival + 1e-9;
}

std::vector<controller::AgentSnapshot> World::true_states() const {
  std::vector<controller::AgentSnapshot> out(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const auto& a = agents_[i];
    out[i].position = a.origin + Vec2{a.px.output(), a.py.output()};
    out[i].velocity = {a.px.output_rate(), a.py.output_rate()};
    out[i].yaw = a.yaw ? controller::wrap_angle(a.yaw0 + a.yaw->output()) : a.yaw0;
    out[i].yaw_rate = a.yaw ? a.yaw->output_rate() : 0.0;
  }
  return out;
}

void World::event(std::string kind, std::vector<std::pair<std::string, std::string>> fields) {
  log_.events.push_back({t_, std::move(kind), std::move(fields)});
}

std::vector<Vec2> World::positions(const std::vector<controller::AgentSnapshot>& s) {
  std::vector<Vec2> p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) p[i] = s[i].position;
  return p;
}

// ---- gains ---------------------------------------------------------------

void World::reschedule_reference(Vec2 leg, Vec2 master_pos) {
  const std::size_t n = agents_.size();
  const auto m = static_cast<std::size_t>(sc_.master);
  controller::AdaptiveRequest req;
  req.duration = sc_.reference_transition_time;
  req.displacement.assign(n, Vec2{});
  req.start_error.assign(n, Vec2{});
  req.participates.assign(n, false);
  req.displacement[m] = leg;
  req.start_error[m] = master_pos - sc_.waypoints[static_cast<std::size_t>(wp_)];
  req.participates[m] = true;
  req.reference_leg = true;
  req.reference_agent = sc_.master;
  const auto g = controller::adaptive_gains(sc_.gains, req);
  gains_.reference = g.reference;
  event("gain_schedule", {{"agent", sc_.agents[m].name},
                          {"kr_x", fmt_num(g.reference.x)},
                          {"kr_y", fmt_num(g.reference.y)}});
}

// ---- transitions ---------------------------------------------------------

void World::close_transition() {
  if (!tr_) return;
  auto& rec = log_.transitions.back();
  if (in_band_since_) rec.settle = *in_band_since_ - rec.start;
  tr_.reset();
  in_band_since_.reset();
}

void World::start_transition(const std::vector<Vec2>& from, const std::vector<Vec2>& to,
                             double duration, const std::string& cause,
                             const std::vector<controller::AgentSnapshot>& meas) {
  auto tr = formation::begin_transition(from, to, t_, duration);
  if (std::none_of(tr.participates.begin(), tr.participates.end(), [](bool b) { return b; }))
    return;
  close_transition();
  tr_ = std::move(tr);
  log_.transitions.push_back({t_, duration, cause, std::nullopt, std::nullopt});
  event("transition_start", {{"cause", cause}, {"duration", fmt_num(duration)}});

  if (!sc_.gains.adaptive) return;
  const std::size_t n = agents_.size();
  controller::AdaptiveRequest req;
  req.duration = duration;
  req.displacement = tr_->dis;
  req.participates = tr_->participates;
  req.start_error.assign(n, Vec2{});
  for (std::size_t i = 0; i < n; ++i) {
    const auto in = sc_.topology.edges_into(static_cast<int>(i));
    if (in.empty()) continue;
    const auto h = static_cast<std::size_t>(sc_.topology.edges()[static_cast<std::size_t>(in.front())].first);
    req.start_error[i] = (to[i] - to[h]) + meas[h].position - meas[i].position +
                         meas[h].velocity * horizons_[i];
  }
  const auto g = controller::adaptive_gains(sc_.gains, req);
  for (std::size_t i = 0; i < n; ++i)
    if (tr_->participates[i]) gains_.consensus[i] = g.consensus[i];
  for (std::size_t i = 0; i < n; ++i) {
    if (!tr_->participates[i] || static_cast<int>(i) == sc_.master) continue;
    event("gain_schedule", {{"agent", sc_.agents[i].name},
                            {"kc_x", fmt_num(gains_.consensus[i].x)},
                            {"kc_y", fmt_num(gains_.consensus[i].y)}});
  }
}

// ---- waypoints and corner turns -----------------------------------------

void World::advance_waypoint(const std::vector<controller::AgentSnapshot>& now) {
  const auto m = static_cast<std::size_t>(sc_.master);
  const Vec2 pm = now[m].position;
  const auto last = static_cast<int>(sc_.waypoints.size()) - 1;

  if (turning_) {
    bool aligned = true;
    for (std::size_t i = 0; i < agents_.size(); ++i)
      if (agents_[i].yaw &&
          std::abs(controller::wrap_angle(now[i].yaw - turn_target_)) >= sc_.yaw.exit_error)
        aligned = false;
    if (aligned || t_ - turn_start_ > sc_.yaw.max_turn_time) {
      turning_ = false;
      event(aligned ? "turn_end" : "turn_timeout", {{"waypoint", std::to_string(wp_)}});
    }
    return;
  }
  if (arrived_) return;
  const Vec2 target = sc_.waypoints[static_cast<std::size_t>(wp_)];
  if (distance(pm, target) > sc_.waypoint_radius) return;

  event("waypoint_reached", {{"index", std::to_string(wp_)},
                             {"x_cm", fmt_num(pm.x)},
                             {"y_cm", fmt_num(pm.y)}});
  if (wp_ == last) {
    arrived_ = true;
    arrival_t_ = t_;
    event("arrived");
    return;
  }
  const Vec2 prev_dir = travel_dir_;
  ++wp_;
  const Vec2 leg = sc_.waypoints[static_cast<std::size_t>(wp_)] - target;
  if (leg.norm() > 0.0) travel_dir_ = leg.normalized();

  if (sc_.yaw.enabled && sc_.yaw.corner_turns) {
    const double turn = std::abs(controller::wrap_angle(std::atan2(travel_dir_.y, travel_dir_.x) -
                                                        std::atan2(prev_dir.y, prev_dir.x)));
    if (turn > sc_.yaw.corner_angle) {
      turning_ = true;
      turn_start_ = t_;
      turn_target_ = std::atan2(travel_dir_.y, travel_dir_.x);
      hold_ = positions(now);
      event("turn_start", {{"waypoint", std::to_string(wp_ - 1)},
                           {"target_rad", fmt_num(turn_target_)}});
    }
  }
  if (gains_.adaptive && sc_.reference_transition_time > 0.0) reschedule_reference(leg, pm);
}

// ---- obstacles ------------------------------------------------------------

std::vector<obstacle::ObstacleCircle> World::estimated_circles() const {
  std::vector<obstacle::ObstacleCircle> cs;
  for (const auto& m : memory_)
    if (m) cs.push_back(obstacle::circle_from_observation(*m));
  return obstacle::group_obstacles(std::move(cs), 2.0 * max_radius(),
                                   {sc_.avoidance.group_radius_cap,
                                    sc_.avoidance.group_max_members});
}

obstacle::Scene World::make_scene(const std::vector<Vec2>& robots, Vec2 heading,
                                  std::vector<obstacle::ObstacleCircle> circles) const {
  obstacle::Scene s;
  for (std::size_t i = 0; i < robots.size(); ++i)
    s.robots.push_back({robots[i], sc_.agents[i].radius});
  s.master = sc_.master;
  for (std::size_t i = 0; i < robots.size(); ++i)
    if (static_cast<int>(i) != sc_.master) s.slaves.push_back(static_cast<int>(i));
  s.heading = heading;
  s.obstacles = std::move(circles);
  s.fov = sc_.avoidance.fov;
  s.look_ahead = sc_.avoidance.look_ahead;
  return s;
}

namespace {

bool shares_member(const std::vector<int>& a, const std::vector<int>& b) {
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  return false;
}

std::string ids_text(const std::vector<int>& ids) {
  std::string s;
  for (int id : ids) s += (s.empty() ? "" : ",") + std::to_string(id + 1);
  return s;
}

std::string point_text(const std::optional<Vec2>& p) {
  return p ? fmt_num(p->x, 3) + "," + fmt_num(p->y, 3) : "-";
}

}  // namespace

void World::apply_plan(const obstacle::AvoidancePlan& plan) {
  auto& e = *event_;
  const std::size_t n = agents_.size();
  e.plan = plan;
  e.lateral.assign(n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<int>(i) == sc_.master) continue;
    if (plan.robot_lateral[i])
      e.lateral[i] = plan.robot_lateral[i];
    else if (plan.hold_lateral[i] || plan.strategy == "squeeze")
      e.lateral[i] = dot(e.scene.robots[i].center, e.n);
  }
}

bool World::try_activate(const std::vector<controller::AgentSnapshot>& now,
                         const std::vector<controller::AgentSnapshot>& meas) {
  const Vec2 f = travel_dir_;
  auto scene = make_scene(positions(now), f, estimated_circles());
  auto ev = obstacle::detect_mode(scene);
  if (ev.mode == obstacle::Mode::none) return false;

  std::vector<int> ids;
  for (int o : ev.obstacles)
    for (int id : scene.obstacles[static_cast<std::size_t>(o)].members) ids.push_back(id);
  const std::string key = obstacle::to_string(ev.mode) + ":" + obstacle::to_string(ev.facing) +
                          ":" + ids_text(ids);

  std::optional<obstacle::AvoidancePlan> plan;
  const obstacle::PlanConfig cfg{sc_.avoidance.margin};
  if (ev.mode == obstacle::Mode::facing) {
    if (ev.facing != obstacle::FacingCase::squeeze) {
      if (noted_.insert(key).second)
        event(ev.facing == obstacle::FacingCase::pass ? "facing_pass" : "facing_queue_unsupported",
              {{"obstacles", ids_text(ids)},
               {"SP1", point_text(ev.SP1)},
               {"SP2", point_text(ev.SP2)}});
      return false;
    }
    plan = obstacle::facing_obstacles_plan(scene, ev, cfg);
  } else {
    plan = obstacle::single_obstacle_plan(scene, ev, cfg);
    if (!plan) return false;
  }

  close_restore_window();
  ActiveEvent e;
  e.mode = ev.mode;
  for (int o : ev.obstacles) e.members.push_back(scene.obstacles[static_cast<std::size_t>(o)].members);
  e.f = f;
  e.n = f.perp();
  e.scene = scene;
  e.ev = ev;
  e.record = log_.avoidance.size();
  event_ = std::move(e);
  apply_plan(*plan);

  AvoidanceRecord rec;
  rec.start = t_;
  rec.mode = obstacle::to_string(ev.mode);
  rec.strategy = plan->strategy;
  rec.obstacles = ids;
  rec.path_clearance = kInf;
  log_.avoidance.push_back(rec);

  std::vector<std::pair<std::string, std::string>> fields{
      {"mode", rec.mode},
      {"facing", obstacle::to_string(ev.facing)},
      {"strategy", plan->strategy},
      {"obstacles", ids_text(ids)},
      {"fallback", ev.fallback ? "1" : "0"},
      {"A", point_text(ev.A)},
      {"B", point_text(ev.B)},
      {"SP1", point_text(ev.SP1)},
      {"SP2", point_text(ev.SP2)},
      {"C", point_text(ev.C)},
      {"SD1", point_text(ev.SD1)},
      {"SD2", point_text(ev.SD2)}};
  if (plan->master_lateral) fields.push_back({"master_lateral", fmt_num(*plan->master_lateral, 3)});
  for (std::size_t i = 0; i < event_->lateral.size(); ++i)
    if (event_->lateral[i])
      fields.push_back({sc_.agents[i].name + "_lateral", fmt_num(*event_->lateral[i], 3)});
  event("avoidance_start", std::move(fields));

  const auto base = offsets_;
  start_transition(base, effective_offsets(meas[static_cast<std::size_t>(sc_.master)].position),
                   sc_.formation.phases()[phase_].duration, "avoidance", meas);
  return true;
}

void World::refresh_event() {
  auto& e = *event_;
  auto scene = e.scene;
  scene.obstacles = estimated_circles();
  auto ev = obstacle::detect_mode(scene);
  if (ev.mode != e.mode) return;
  const obstacle::PlanConfig cfg{sc_.avoidance.margin};
  std::optional<obstacle::AvoidancePlan> plan;
  if (ev.mode == obstacle::Mode::facing) {
    if (ev.facing != obstacle::FacingCase::squeeze) return;
    plan = obstacle::facing_obstacles_plan(scene, ev, cfg);
  } else {
    plan = obstacle::single_obstacle_plan(scene, ev, cfg);
  }
  if (!plan || plan->strategy != e.plan.strategy) return;
  for (int o : ev.obstacles)
    if (std::none_of(e.members.begin(), e.members.end(), [&](const std::vector<int>& m) {
          return shares_member(m, scene.obstacles[static_cast<std::size_t>(o)].members);
        }))
      return;
  e.members.clear();
  for (int o : ev.obstacles) e.members.push_back(scene.obstacles[static_cast<std::size_t>(o)].members);
  e.ev = ev;
  if (ev.mode == obstacle::Mode::single) {
    // A better estimate must not flip the side chosen at the trigger.
    const double olat = dot(scene.obstacles[static_cast<std::size_t>(ev.obstacles.front())].center, e.n);
    auto keep_side = [olat](std::optional<double>& now, const std::optional<double>& was) {
      if (now && was && (*now - olat) * (*was - olat) < 0.0) *now = 2.0 * olat - *now;
    };
    keep_side(plan->master_lateral, e.plan.master_lateral);
    for (std::size_t i = 0; i < plan->robot_lateral.size(); ++i)
      keep_side(plan->robot_lateral[i], e.plan.robot_lateral[i]);
  }
  const auto before = e.lateral;
  const auto master_before = e.plan.master_lateral;
  apply_plan(*plan);
  bool moved = master_before.has_value() != e.plan.master_lateral.has_value() ||
               (master_before && std::abs(*master_before - *e.plan.master_lateral) > 0.5);
  for (std::size_t i = 0; i < before.size(); ++i)
    moved = moved || before[i].has_value() != e.lateral[i].has_value() ||
            (before[i] && std::abs(*before[i] - *e.lateral[i]) > 0.5);
  if (!moved) return;
  std::vector<std::pair<std::string, std::string>> fields;
  if (e.plan.master_lateral) fields.push_back({"master_lateral", fmt_num(*e.plan.master_lateral, 3)});
  for (std::size_t i = 0; i < e.lateral.size(); ++i)
    if (e.lateral[i]) fields.push_back({sc_.agents[i].name + "_lateral", fmt_num(*e.lateral[i], 3)});
  event("avoidance_update", std::move(fields));
}

std::vector<obstacle::ObstacleCircle> World::event_truth() const {
  std::vector<obstacle::ObstacleCircle> out;
  for (const auto& c : truth_)
    for (const auto& m : event_->members)
      if (shares_member(c.members, m)) {
        out.push_back(c);
        break;
      }
  return out;
}

bool World::event_cleared(const std::vector<controller::AgentSnapshot>& now) const {
  const auto& e = *event_;
  for (const auto& c : event_truth())
    for (std::size_t i = 0; i < now.size(); ++i) {
      // Robots that merely hold their lateral coordinate are restored in place.
      const bool moved = static_cast<int>(i) == sc_.master
                             ? e.plan.master_detour
                             : e.lateral[i] && std::abs(*e.lateral[i] - dot(e.scene.robots[i].center, e.n)) > 1.0;
      if (moved && dot(now[i].position - c.center, e.f) < c.radius + sc_.agents[i].radius) return false;
    }
  return true;
}

void World::close_restore_window() {
  restore_window_.reset();
}

std::vector<Vec2> World::effective_offsets(Vec2 master_pos) const {
  auto off = offsets_;
  if (!event_) return off;
  const Vec2 n = event_->n;
  const double lat_m = dot(master_pos, n);
  for (std::size_t i = 0; i < off.size(); ++i) {
    if (!event_->lateral[i]) continue;
    off[i] += n * (*event_->lateral[i] - lat_m - dot(off[i], n));
  }
  return off;
}

Vec2 World::reference_point() const {
  const Vec2 wp = sc_.waypoints[static_cast<std::size_t>(wp_)];
  if (turning_) return hold_[static_cast<std::size_t>(sc_.master)];
  if (!event_ || !event_->plan.master_lateral) return wp;
  return wp + event_->n * (*event_->plan.master_lateral - dot(wp, event_->n));
}

// ---- step -------------------------------------------------------------------

void World::step() {
  const std::size_t n = agents_.size();
  const auto m = static_cast<std::size_t>(sc_.master);

  auto now = true_states();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = now[i];
    if (!s.position.finite() || !s.velocity.finite() || !std::isfinite(s.yaw) ||
        max_axis(s.position) > kDivergenceBound)
      throw DivergenceError("agent '" + sc_.agents[i].name + "' state diverged at t=" + fmt_num(t_));
  }
  auto meas = now;
  for (std::size_t i = 0; i < n; ++i)
    if (sc_.noise_std > 0.0)
      meas[i].position = agents_[i].origin + Vec2{agents_[i].px.measure(), agents_[i].py.measure()};

  if (k_ == 0) event("start", {{"architecture", sc_.baseline ? "baseline" : "enhanced"},
                               {"agents", std::to_string(n)}});

  advance_waypoint(now);

  const std::size_t want = sc_.formation.phase_index(wp_);
  if (want != phase_) {
    const auto from = offsets_;
    phase_ = want;
    const auto& ph = sc_.formation.phases()[phase_];
    offsets_ = ph.offsets;
    yaw_offsets_ = ph.yaw_offsets;
    yaw_offsets_.resize(n, 0.0);
    event("phase", {{"index", std::to_string(phase_)}, {"trigger", std::to_string(ph.trigger)}});
    if (!event_) start_transition(from, offsets_, ph.duration, "waypoint", meas);
  }

  if (sc_.avoidance.enabled && !sc_.obstacles.empty()) {
    for (std::size_t o = 0; o < sc_.obstacles.size(); ++o)
      for (std::size_t i = 0; i < n; ++i) {
        auto obs = obstacle::observe(sc_.obstacles[o].id, sc_.obstacles[o].polygon,
                                     now[i].position, 0.5 * sc_.avoidance.fov);
        if (!obs) continue;
        const double area = std::abs(signed_area(obs->polygon));
        if (area > memory_area_[o] + 1e-9) {
          memory_area_[o] = area;
          memory_[o] = std::move(obs);
        }
      }
    if (event_) {
      refresh_event();
      if (event_cleared(now)) {
        const auto from = effective_offsets(meas[m].position);
        auto& rec = log_.avoidance[event_->record];
        rec.end = t_;
        event("avoidance_end", {{"obstacles", ids_text(rec.obstacles)},
                                {"path_clearance_cm", fmt_num(rec.path_clearance)}});
        restore_window_ = event_->record;
        event_.reset();
        start_transition(from, offsets_, sc_.formation.phases()[phase_].duration, "restore", meas);
      }
    }
    if (!event_ && !turning_ && !arrived_) try_activate(now, meas);
  }

  // Controller.
  auto offsets = effective_offsets(meas[m].position);
  if (sc_.ramp_speed) {
    // Offsets handed to the controller slew toward their targets at the ramp speed.
    const double step = *sc_.ramp_speed * sc_.dt;
    if (commanded_offsets_.empty()) commanded_offsets_ = offsets;
    for (std::size_t i = 0; i < n; ++i) {
      auto& c = commanded_offsets_[i];
      c.x += std::clamp(offsets[i].x - c.x, -step, step);
      c.y += std::clamp(offsets[i].y - c.y, -step, step);
    }
    offsets = commanded_offsets_;
  }
  const Vec2 ref = reference_point();
  auto ctl_view = meas;
  if (sc_.delay_steps > 0) {
    master_velocity_queue_.push_back(now[m].velocity);
    while (static_cast<int>(master_velocity_queue_.size()) > sc_.delay_steps + 1)
      master_velocity_queue_.pop_front();
    ctl_view[m].velocity = master_velocity_queue_.front();
  }
  controller::ControlInputs in{sc_.topology, gains_, ctl_view, offsets, -ref, sc_.dt, sc_.limits,
                               horizons_};
  auto u = sc_.baseline ? controller::baseline_control(in) : controller::enhanced_control(in);
  if (turning_) {
    // Position consensus is off during corner turns; every agent keeps station.
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e = hold_[i] - meas[i].position;
      const auto k = i == m ? gains_.reference : gains_.consensus[i];
      const double v = sc_.limits[i].v_max;
      u[i].vx = std::clamp(-k.x * e.x, -v, v);
      u[i].vy = std::clamp(-k.y * e.y, -v, v);
    }
  }
  if (sc_.yaw.enabled) {
    double target;
    if (sc_.yaw.target)
      target = *sc_.yaw.target;
    else if (turning_)
      target = turn_target_;
    else
      target = controller::heading_from_motion(ref, now[m].position, heading_prev_);
    heading_prev_ = target;
    std::unique_ptr<bool[]> has_yaw(new bool[n]);
    for (std::size_t i = 0; i < n; ++i) has_yaw[i] = agents_[i].yaw.has_value();
    controller::YawInputs yi{sc_.topology, gains_,        ctl_view,
                             yaw_offsets_, target,        sc_.horizon.value_or(sc_.dt),
                             std::span<const bool>(has_yaw.get(), n), sc_.limits};
    const auto w = controller::yaw_consensus(yi);
    for (std::size_t i = 0; i < n; ++i) u[i].omega = w[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(u[i].vx) || !std::isfinite(u[i].vy) || !std::isfinite(u[i].omega))
      throw DivergenceError("non-finite command for agent '" + sc_.agents[i].name +
                            "' at t=" + fmt_num(t_));

  // Metrics on the true state.
  Row row;
  row.step = k_;
  row.t = t_;
  row.waypoint = wp_;
  row.phase = static_cast<int>(phase_);
  row.mode = event_ ? static_cast<int>(event_->mode) : 0;
  row.turning = turning_;

  const auto pos = positions(now);
  if (tr_) {
    const auto rep = formation::check_convergence(pos, sc_.master, *tr_, t_, sc_.convergence_tol,
                                                  sc_.grace_factor);
    last_residual_ = rep.max_abs;
    auto& rec = log_.transitions.back();
    if (rep.status == formation::Convergence::converged) {
      if (!rec.first_converged) rec.first_converged = t_ - rec.start;
      if (!in_band_since_) in_band_since_ = t_;
    } else {
      in_band_since_.reset();
    }
  }
  row.residual = last_residual_;

  double cons = 0.0;
  double base_err = 0.0;
  const auto true_off = effective_offsets(now[m].position);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == m) continue;
    const Vec2 rel = now[i].position - now[m].position;
    const Vec2 e = true_off[i] - rel;
    cons = std::max(cons, max_axis(e));
    base_err = std::max(base_err, max_axis(offsets_[i] - rel));
    if (!turning_) {
      rel_sq_sum_ += dot(e, e);
      ++rel_count_;
      log_.summary.relative_worst = std::max(log_.summary.relative_worst, e.norm());
    }
  }
  row.consensus_error = cons;
  log_.summary.max_consensus_error = std::max(log_.summary.max_consensus_error, cons);
  if (restore_window_) {
    auto& rec = log_.avoidance[*restore_window_];
    rec.restored_error = std::min(rec.restored_error.value_or(kInf), base_err);
  }

  double clear = kInf;
  for (const auto& c : polygon_circles_)
    for (std::size_t i = 0; i < n; ++i)
      clear = std::min(clear, distance(pos[i], c.center) - c.radius - sc_.agents[i].radius);
  row.clearance = clear;
  log_.summary.min_clearance = std::min(log_.summary.min_clearance, clear);
  if (event_) {
    auto& rec = log_.avoidance[event_->record];
    for (const auto& c : event_truth())
      for (std::size_t i = 0; i < n; ++i)
        rec.path_clearance = std::min(rec.path_clearance, distance(pos[i], c.center) - c.radius);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (sc_.agents[i].kind != sc_.agents[j].kind) continue;  // UAV flies over UGVs
      const double sep = distance(pos[i], pos[j]) - sc_.agents[i].radius - sc_.agents[j].radius;
      log_.summary.min_separation = std::min(log_.summary.min_separation, sep);
      if (sep < 0.0 && !log_.summary.collision) {
        log_.summary.collision = true;
        event("collision", {{"a", sc_.agents[i].name}, {"b", sc_.agents[j].name}});
      }
    }
  if (clear < 0.0 && !obstacle_hit_) {
    obstacle_hit_ = true;
    log_.summary.collision = true;
    event("obstacle_contact", {{"clearance_cm", fmt_num(clear)}});
  }

  row.agents.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    row.agents[i] = {now[i].position, now[i].velocity, now[i].yaw, now[i].yaw_rate, u[i]};
  log_.rows.push_back(std::move(row));

  for (std::size_t i = 0; i < n; ++i) {
    agents_[i].px.update(u[i].vx);
    agents_[i].py.update(u[i].vy);
    if (agents_[i].yaw) agents_[i].yaw->update(u[i].omega);
  }
  ++k_;
  t_ = static_cast<double>(k_) * sc_.dt;
}

RunLog World::finish(bool diverged, const std::string& why) {
  close_transition();
  if (event_) {
    event("avoidance_open", {{"obstacles", ids_text(log_.avoidance[event_->record].obstacles)}});
  }
  auto& s = log_.summary;
  s.scenario = sc_.name;
  s.architecture = sc_.baseline ? "baseline" : "enhanced";
  s.dt = sc_.dt;
  s.steps = static_cast<std::int64_t>(log_.rows.size());
  s.final_time = log_.rows.empty() ? 0.0 : log_.rows.back().t;
  s.seed = sc_.seed;
  s.noise_std = sc_.noise_std;
  s.final_waypoint_reached = arrived_;
  s.arrival_time = arrival_t_;
  s.relative_rms = rel_count_ > 0 ? std::sqrt(rel_sq_sum_ / static_cast<double>(rel_count_)) : 0.0;
  s.divergence = diverged;
  s.divergence_message = why;
  s.final_positions = positions(true_states());
  if (diverged) event("divergence", {{"message", why}});
  return log_;
}

RunLog run(const Scenario& scenario) {
  World w(scenario);
  try {
    while (!w.done()) w.step();
  } catch (const DivergenceError& e) {
    return w.finish(true, e.what());
  }
  return w.finish();
}

}  // namespace niform::sim
