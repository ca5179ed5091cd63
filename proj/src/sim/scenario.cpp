#include "niform/sim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "niform/error.hpp"

namespace niform::sim {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Thin cursor that remembers where in the document it points.
struct Node {
  const json& j;
  std::string path;

  Node at(const std::string& key) const {
    if (!j.is_object() || !j.contains(key)) throw ScenarioError(path + "/" + key, "required field missing");
    return {j.at(key), path + "/" + key};
  }
  Node at(std::size_t i) const { return {j.at(i), path + "/" + std::to_string(i)}; }
  bool has(const std::string& key) const { return j.is_object() && j.contains(key) && !j.at(key).is_null(); }
  std::optional<Node> opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return Node{j.at(key), path + "/" + key};
  }

  [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(path, what); }

  double num() const {
    if (!j.is_number()) fail("expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double positive() const {
    const double v = num();
    if (!(v > 0.0)) fail("must be > 0");
    return v;
  }
  double non_negative() const {
    const double v = num();
    if (v < 0.0) fail("must be >= 0");
    return v;
  }
  std::int64_t integer() const {
    if (!j.is_number_integer()) fail("expected an integer");
    return j.get<std::int64_t>();
  }
  bool boolean() const {
    if (!j.is_boolean()) fail("expected true or false");
    return j.get<bool>();
  }
  std::string str() const {
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }
  std::size_t array_size() const {
    if (!j.is_array()) fail("expected an array");
    return j.size();
  }
  Vec2 vec2() const {
    if (array_size() != 2) fail("expected [x, y]");
    return {at(std::size_t{0}).num(), at(std::size_t{1}).num()};
  }
  void only(std::initializer_list<const char*> keys) const {
    if (!j.is_object()) fail("expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!allowed.count(it.key())) throw ScenarioError(path + "/" + it.key(), "unknown field");
  }
};

double unit_factor(const Node& n, const std::string& unit) {
  if (unit == "1/s") return 1.0;
  if (unit == "m/s per cm") return 100.0;
  if (unit == "rad/s per deg") return 180.0 / std::numbers::pi;
  n.fail("unknown gain unit '" + unit + "' (use \"1/s\", \"m/s per cm\" or \"rad/s per deg\")");
}

int agent_ref(const Node& n, const std::string& text, std::size_t n_agents) {
  std::size_t pos = 0;
  int id = 0;
  try {
    id = std::stoi(text, &pos);
  } catch (...) {
    n.fail("agent id '" + text + "' is not a number");
  }
  if (pos != text.size() || id < 1 || static_cast<std::size_t>(id) > n_agents)
    n.fail("agent id '" + text + "' out of range 1.." + std::to_string(n_agents));
  return id - 1;
}

controller::AxisGains axis_gains(const Node& n, double default_factor) {
  n.only({"x", "y", "unit"});
  const double f = n.has("unit") ? unit_factor(n.at("unit"), n.at("unit").str()) : default_factor;
  return {n.at("x").num() * f, n.at("y").num() * f};
}

}  // namespace

double noise_profile_std(const std::string& profile) {
  if (profile == "none") return 0.0;
  if (profile == "lab") return 1.0;
  throw Error("unknown noise profile '" + profile + "' (use none or lab)");
}

Scenario parse_scenario(const std::string& text, const std::string& origin,
                        const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(origin, std::string("malformed JSON: ") + e.what());
  }
  const Node root{doc, ""};
  root.only({"name", "description", "dt", "duration", "seed", "architecture", "prediction", "noise",
             "models", "agents", "topology", "gains", "saturation", "waypoints", "waypoint_radius",
             "stop_after_arrival", "formation", "yaw", "obstacles", "avoidance"});

  Scenario s;
  s.name = root.at("name").str();
  if (auto d = root.opt("description")) s.description = d->str();
  if (auto v = root.opt("dt")) s.dt = v->positive();
  if (auto v = root.opt("duration")) s.duration = v->non_negative();
  if (auto v = root.opt("seed")) {
    const auto seed = v->integer();
    if (seed < 0) v->fail("must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  if (auto v = root.opt("architecture")) {
    const std::string a = v->str();
    if (a != "enhanced" && a != "baseline") v->fail("expected \"enhanced\" or \"baseline\"");
    s.baseline = a == "baseline";
  }
  s.horizon = s.dt;
  if (auto p = root.opt("prediction")) {
    p->only({"horizon", "delay_steps"});
    if (auto h = p->opt("horizon")) {
      if (h->j.is_string()) {
        if (h->str() != "auto") h->fail("expected seconds or \"auto\"");
        s.horizon.reset();
      } else {
        s.horizon = h->non_negative();
      }
    }
    if (auto d = p->opt("delay_steps")) {
      const auto k = d->integer();
      if (k < 0) d->fail("must be >= 0");
      s.delay_steps = static_cast<int>(k);
    }
  }
  if (auto nz = root.opt("noise")) {
    nz->only({"profile", "std"});
    if (auto p = nz->opt("profile")) {
      s.noise_profile = p->str();
      try {
        s.noise_std = noise_profile_std(s.noise_profile);
      } catch (const Error& e) {
        p->fail(e.what());
      }
    }
    if (auto v = nz->opt("std")) {
      s.noise_std = v->non_negative();
      s.noise_profile = "custom";
    }
  }

  s.models = lti::ModelLibrary::builtin();
  if (auto m = root.opt("models")) {
    const std::string src = m->str();
    if (src != "builtin") {
      std::filesystem::path p(src);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      s.models = lti::ModelLibrary::load(p);
    }
  }

  // Agents.
  const Node agents = root.at("agents");
  const std::size_t n = agents.array_size();
  if (n == 0) agents.fail("at least one agent is required");
  std::vector<bool> has_initial(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const Node a = agents.at(i);
    a.only({"name", "kind", "initial", "yaw_deg", "yaw_dynamics", "radius", "max_speed"});
    AgentSpec spec;
    spec.name = a.has("name") ? a.at("name").str() : "agent" + std::to_string(i + 1);
    try {
      spec.kind = lti::vehicle_from_string(a.at("kind").str());
    } catch (const ScenarioError&) {
      throw;
    } catch (const Error& e) {
      a.at("kind").fail(e.what());
    }
    if (auto v = a.opt("initial")) {
      spec.initial = v->vec2();
      has_initial[i] = true;
    }
    if (auto v = a.opt("yaw_deg")) spec.yaw0 = v->num() * kDeg;
    spec.yaw_dynamics = spec.kind == lti::Vehicle::ugv;
    if (auto v = a.opt("yaw_dynamics")) spec.yaw_dynamics = v->boolean();
    if (auto v = a.opt("radius")) spec.radius = v->positive();
    if (auto v = a.opt("max_speed")) spec.max_speed = v->positive();
    s.agents.push_back(spec);
  }

  // Topology (1-based ids in the file).
  {
    const Node t = root.at("topology");
    t.only({"edges", "reference"});
    std::vector<graph::Edge> edges;
    const Node e = t.at("edges");
    for (std::size_t k = 0; k < e.array_size(); ++k) {
      const Node pair = e.at(k);
      if (pair.array_size() != 2) pair.fail("expected [head, tail]");
      edges.push_back({static_cast<int>(pair.at(std::size_t{0}).integer()) - 1,
                       static_cast<int>(pair.at(std::size_t{1}).integer()) - 1});
    }
    std::vector<int> refs;
    const Node r = t.at("reference");
    for (std::size_t k = 0; k < r.array_size(); ++k) refs.push_back(static_cast<int>(r.at(k).integer()) - 1);
    if (refs.size() != 1) r.fail("exactly one reference (master) agent is required");
    try {
      s.topology = graph::build_topology(static_cast<int>(n), edges, refs);
    } catch (const TopologyError& err) {
      t.fail(err.what());
    }
    s.master = refs.front();
  }

  // Gains.
  {
    const Node g = root.at("gains");
    g.only({"unit", "reference", "consensus", "yaw", "adaptive", "reference_transition_time"});
    const double f = g.has("unit") ? unit_factor(g.at("unit"), g.at("unit").str()) : 1.0;
    s.gains.reference = axis_gains(g.at("reference"), f);
    s.gains.consensus.assign(n, {});
    if (auto c = g.opt("consensus")) {
      if (!c->j.is_object()) c->fail("expected an object keyed by agent id");
      for (auto it = c->j.begin(); it != c->j.end(); ++it) {
        const Node entry{it.value(), c->path + "/" + it.key()};
        s.gains.consensus[static_cast<std::size_t>(agent_ref(entry, it.key(), n))] = axis_gains(entry, f);
      }
    }
    if (auto y = g.opt("yaw")) {
      y->only({"reference", "consensus", "unit"});
      const double fy = y->has("unit") ? unit_factor(y->at("unit"), y->at("unit").str()) : 1.0;
      if (auto v = y->opt("reference")) s.gains.reference_yaw = v->num() * fy;
      if (auto v = y->opt("consensus")) s.gains.consensus_yaw = v->num() * fy;
    }
    if (auto a = g.opt("adaptive")) s.gains.adaptive = a->boolean();
    if (auto t = g.opt("reference_transition_time")) s.reference_transition_time = t->non_negative();
  }

  // Saturation.
  {
    double ugv = 100.0, uav = 200.0, yaw = 1.5;
    if (auto sat = root.opt("saturation")) {
      sat->only({"UGV", "UAV", "yaw_rate"});
      if (auto v = sat->opt("UGV")) ugv = v->positive();
      if (auto v = sat->opt("UAV")) uav = v->positive();
      if (auto v = sat->opt("yaw_rate")) yaw = v->positive();
    }
    for (const auto& a : s.agents)
      s.limits.push_back({a.max_speed.value_or(a.kind == lti::Vehicle::uav ? uav : ugv), yaw});
  }

  // Waypoints.
  {
    const Node w = root.at("waypoints");
    if (w.array_size() == 0) w.fail("at least one waypoint is required");
    for (std::size_t k = 0; k < w.array_size(); ++k) s.waypoints.push_back(w.at(k).vec2());
    if (auto r = root.opt("waypoint_radius")) s.waypoint_radius = r->positive();
    if (auto r = root.opt("stop_after_arrival")) s.stop_after_arrival = r->non_negative();
  }

  // Formation.
  {
    const Node f = root.at("formation");
    f.only({"phases", "tolerance", "grace_factor", "ramp_speed"});
    if (auto v = f.opt("ramp_speed")) s.ramp_speed = v->positive();
    if (auto v = f.opt("tolerance")) s.convergence_tol = v->positive();
    if (auto v = f.opt("grace_factor")) s.grace_factor = v->non_negative();
    const Node ph = f.at("phases");
    if (ph.array_size() == 0) ph.fail("at least one phase is required");
    std::vector<formation::Phase> phases;
    for (std::size_t k = 0; k < ph.array_size(); ++k) {
      const Node p = ph.at(k);
      p.only({"trigger", "offsets", "yaw_offsets_deg", "duration"});
      formation::Phase phase;
      phase.trigger = p.has("trigger") ? static_cast<int>(p.at("trigger").integer()) : 0;
      if (auto d = p.opt("duration")) phase.duration = d->positive();
      phase.offsets.assign(n, Vec2{});
      phase.yaw_offsets.assign(n, 0.0);
      if (auto o = p.opt("offsets")) {
        if (!o->j.is_object()) o->fail("expected an object keyed by agent id");
        for (auto it = o->j.begin(); it != o->j.end(); ++it) {
          const Node entry{it.value(), o->path + "/" + it.key()};
          phase.offsets[static_cast<std::size_t>(agent_ref(entry, it.key(), n))] = entry.vec2();
        }
      }
      if (auto o = p.opt("yaw_offsets_deg")) {
        if (!o->j.is_object()) o->fail("expected an object keyed by agent id");
        for (auto it = o->j.begin(); it != o->j.end(); ++it) {
          const Node entry{it.value(), o->path + "/" + it.key()};
          phase.yaw_offsets[static_cast<std::size_t>(agent_ref(entry, it.key(), n))] = entry.num() * kDeg;
        }
      }
      phases.push_back(std::move(phase));
    }
    try {
      s.formation = formation::FormationSpec(std::move(phases), n, s.master);
    } catch (const Error& e) {
      ph.fail(e.what());
    }
    if (s.formation.phases().front().trigger != 0) ph.fail("the first phase must have trigger 0");
  }

  // Unspecified initial positions default to the phase-0 formation.
  if (!has_initial[static_cast<std::size_t>(s.master)])
    agents.at(static_cast<std::size_t>(s.master)).fail("the master needs an initial position");
  for (std::size_t i = 0; i < n; ++i)
    if (!has_initial[i])
      s.agents[i].initial = s.agents[static_cast<std::size_t>(s.master)].initial +
                            s.formation.phases().front().offsets[i];

  // Yaw.
  if (auto y = root.opt("yaw")) {
    y->only({"enabled", "target_deg", "corner_turns", "corner_angle_deg", "exit_error_deg",
             "max_turn_time", "model"});
    if (auto v = y->opt("enabled")) s.yaw.enabled = v->boolean();
    if (auto v = y->opt("target_deg")) s.yaw.target = v->num() * kDeg;
    if (auto v = y->opt("corner_turns")) s.yaw.corner_turns = v->boolean();
    if (auto v = y->opt("corner_angle_deg")) s.yaw.corner_angle = v->positive() * kDeg;
    if (auto v = y->opt("exit_error_deg")) s.yaw.exit_error = v->positive() * kDeg;
    if (auto v = y->opt("max_turn_time")) s.yaw.max_turn_time = v->positive();
    if (auto v = y->opt("model")) {
      s.yaw.model = v->str();
      if (!s.models.find(s.yaw.model)) v->fail("model '" + s.yaw.model + "' not in library");
    }
  }

  // Obstacles.
  if (auto obs = root.opt("obstacles")) {
    for (std::size_t k = 0; k < obs->array_size(); ++k) {
      const Node o = obs->at(k);
      o.only({"name", "polygon"});
      ObstacleSpec spec;
      spec.id = static_cast<int>(k);
      spec.name = o.has("name") ? o.at("name").str() : "obstacle" + std::to_string(k + 1);
      const Node poly = o.at("polygon");
      for (std::size_t v = 0; v < poly.array_size(); ++v) spec.polygon.push_back(poly.at(v).vec2());
      if (!is_simple(spec.polygon)) poly.fail("polygon must be simple with at least 3 vertices");
      if (std::abs(signed_area(spec.polygon)) <= 0.0) poly.fail("polygon has zero area");
      s.obstacles.push_back(std::move(spec));
    }
  }
  if (auto av = root.opt("avoidance")) {
    av->only({"enabled", "fov", "look_ahead", "margin", "group_radius_cap", "group_max_members"});
    s.avoidance.enabled = !s.obstacles.empty();
    if (auto v = av->opt("enabled")) s.avoidance.enabled = v->boolean();
    if (auto v = av->opt("fov")) s.avoidance.fov = v->positive();
    if (auto v = av->opt("look_ahead")) s.avoidance.look_ahead = v->non_negative();
    if (auto v = av->opt("margin")) s.avoidance.margin = v->non_negative();
    if (auto v = av->opt("group_radius_cap")) s.avoidance.group_radius_cap = v->positive();
    if (auto v = av->opt("group_max_members")) {
      const auto k = v->integer();
      if (k < 1) v->fail("must be >= 1");
      s.avoidance.group_max_members = static_cast<std::size_t>(k);
    }
  } else {
    s.avoidance.enabled = !s.obstacles.empty();
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string(), "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string(), path.parent_path());
}

}  // namespace niform::sim
