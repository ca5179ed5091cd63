#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "niform/error.hpp"
#include "niform/lti/certify.hpp"
#include "niform/sim/scenario.hpp"
#include "niform/sim/world.hpp"

using namespace niform;
using namespace niform::sim;

namespace {

const std::filesystem::path kScenarios = NIFORM_SOURCE_DIR "/scenarios";

Scenario shipped(const std::string& name) { return load_scenario(kScenarios / (name + ".json")); }

const char* kMinimal = R"({
  "name": "mini", "dt": 0.02, "duration": 6, "seed": 3,
  "agents": [{"name": "m", "kind": "UGV", "initial": [0, 0]}, {"name": "s", "kind": "UGV"}],
  "topology": {"edges": [[1, 2]], "reference": [1]},
  "gains": {"reference": {"x": -0.5, "y": -0.5}, "consensus": {"2": {"x": -0.5, "y": -0.5}}},
  "waypoints": [[0, 100]],
  "formation": {"phases": [{"trigger": 0, "offsets": {"2": [-100, 0]}}]}
})";

std::string field_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.field();
  }
  return "<accepted>";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  return s.replace(p, from.size(), to);
}

std::string outputs(const RunLog& log) {
  std::ostringstream os;
  log.write_table(os);
  log.write_summary(os);
  log.write_events(os);
  return os.str();
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("scenario errors name the offending field") {
  CHECK(field_of(kMinimal) == "<accepted>");
  CHECK(field_of(replace(kMinimal, "\"UGV\", \"initial\"", "\"tank\", \"initial\"")) ==
        "/agents/0/kind");
  CHECK(field_of(replace(kMinimal, "\"dt\": 0.02", "\"dt\": -1")) == "/dt");
  CHECK(field_of(replace(kMinimal, "[[1, 2]]", "[[1, 7]]")).rfind("/topology", 0) == 0);
  CHECK(field_of(replace(kMinimal, "\"waypoints\": [[0, 100]]", "\"waypoints\": []")) ==
        "/waypoints");
  CHECK(field_of(replace(kMinimal, "\"seed\": 3", "\"seed\": 3, \"bogus\": 1")) == "/bogus");
  CHECK_THROWS_AS(parse_scenario("{not json"), ScenarioError);
}

TEST_CASE("runs are deterministic and byte-stable") {
  const auto sc = parse_scenario(kMinimal);
  const auto a = run(sc), b = run(sc);
  CHECK(outputs(a) == outputs(b));
  CHECK(a.rows.size() == 301);
  CHECK(a.rows.front().t == 0.0);

  auto noisy = apply_overrides(sc, {.noise_profile = "lab"});
  CHECK(noisy.noise_std == 1.0);
  CHECK(outputs(run(noisy)) == outputs(run(noisy)));
  auto other = apply_overrides(noisy, {.seed = 4});
  CHECK(outputs(run(other)) != outputs(run(noisy)));
}

TEST_CASE("no obstacles: clearance is +inf") {
  const auto log = run(parse_scenario(kMinimal));
  CHECK(std::isinf(log.summary.min_clearance));
  for (const auto& r : log.rows) CHECK(std::isinf(r.clearance));
  CHECK(log.avoidance.empty());
}

TEST_CASE("zero gains: the robots never move") {
  auto sc = parse_scenario(kMinimal);
  sc.gains.reference = {0, 0};
  for (auto& g : sc.gains.consensus) g = {0, 0};
  const auto log = run(sc);
  for (const auto& r : log.rows)
    for (std::size_t i = 0; i < r.agents.size(); ++i)
      CHECK(r.agents[i].position == log.rows.front().agents[i].position);
}

TEST_CASE("overrides") {
  const auto sc = parse_scenario(kMinimal);
  const auto b = apply_overrides(sc, {.baseline = true, .dt = 0.01});
  CHECK(b.baseline);
  CHECK(b.dt == 0.01);
  CHECK(run(b).summary.architecture == "baseline");
  CHECK_THROWS_AS(apply_overrides(sc, {.dt = 0.0}), Error);
  CHECK_THROWS_AS(apply_overrides(sc, {.noise_profile = "storm"}), Error);
}

TEST_CASE("compare runs both architectures on one scenario") {
  const auto c = compare(parse_scenario(kMinimal));
  CHECK(c.enhanced.summary.architecture == "enhanced");
  CHECK(c.baseline.summary.architecture == "baseline");
  REQUIRE(c.rows.size() == 6);
  CHECK(c.rows[1].metric == "relative_worst_cm");
  CHECK(c.rows[1].enhanced == c.enhanced.summary.relative_worst);
  CHECK(c.rows[1].baseline == c.baseline.summary.relative_worst);

  auto tiny = parse_scenario(kMinimal);
  tiny.duration = 0.0;
  CHECK_THROWS_AS(compare(tiny), Error);
}

TEST_CASE("Test 3: mixed course settles at the type-0 equilibrium without collision") {
  const auto sc = shipped("test3");
  const auto log = run(sc);
  const auto& s = log.summary;
  CHECK_FALSE(s.collision);
  CHECK_FALSE(s.divergence);
  CHECK(s.final_waypoint_reached);
  CHECK(s.min_clearance > 0.0);
  REQUIRE(log.avoidance.size() >= 2);
  // Finite DC gain G and proportional gain k: at rest the error to the target
  // is (target − p0)/(1 − k·G) per axis, independently of the path taken.
  const auto& offs = sc.formation.phases().back().offsets;
  const Vec2 m = s.final_positions[sc.master];
  const double gx = lti::dc_gain(sc.models.channel(lti::Vehicle::ugv, "velx").tf);
  const double gy = lti::dc_gain(sc.models.channel(lti::Vehicle::ugv, "vely").tf);
  for (std::size_t i = 1; i < offs.size(); ++i) {
    CAPTURE(i);
    const Vec2 target = m + offs[i], p0 = sc.agents[i].initial;
    const auto& k = sc.gains.consensus[i];
    const Vec2 expect = target - Vec2{(target.x - p0.x) / (1 - k.x * gx), (target.y - p0.y) / (1 - k.y * gy)};
    CHECK(std::abs(s.final_positions[i].x - expect.x) < 0.5);
    CHECK(std::abs(s.final_positions[i].y - expect.y) < 0.5);
    // Far closer to the formation than the distance travelled.
    CHECK(distance(s.final_positions[i] - m, offs[i]) < 20.0);
  }
}

TEST_CASE("shipped scenarios: safe, bounded, arrived") {
  for (const char* name : {"case1", "case1_perturbed", "case2", "test1", "test1_baseline", "test1_leg",
                           "test1_leg_baseline", "test2_exp1", "test2_exp2", "test3"}) {
    CAPTURE(name);
    const auto log = run(shipped(name));
    const auto& s = log.summary;
    CHECK_FALSE(s.divergence);
    CHECK_FALSE(s.collision);
    CHECK(s.final_waypoint_reached);
    for (const auto& p : s.final_positions) {
      CHECK(p.finite());
      CHECK(p.norm() < 1e5);
    }
    for (const auto& a : log.avoidance) {
      CHECK(a.end.has_value());
      CHECK(a.path_clearance > 0.0);
    }
  }
}

TEST_CASE("auto horizon is the mean follower lag of the two channels") {
  const auto sc = shipped("test3");
  World w(sc);
  REQUIRE_FALSE(sc.horizon);
  const double lag = 0.5 * (follower_lag(sc.models.channel(lti::Vehicle::ugv, "velx").tf, -1.5) +
                            follower_lag(sc.models.channel(lti::Vehicle::ugv, "vely").tf, -1.5));
  CHECK(lag > 0.0);
  CHECK(w.horizons()[sc.master] == 0.0);
  CHECK(w.horizons().size() == sc.agents.size());
  CHECK(w.horizons()[1] == doctest::Approx(lag));
}

}  // TEST_SUITE
