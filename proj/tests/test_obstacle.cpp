#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "niform/error.hpp"
#include "niform/obstacle/obstacle.hpp"

using namespace niform;
using namespace niform::obstacle;

namespace {

Polygon box(Vec2 c, double half) {
  return {{c.x - half, c.y - half}, {c.x + half, c.y - half}, {c.x + half, c.y + half},
          {c.x - half, c.y + half}};
}

// Master at the origin heading +y, slaves 100 cm behind and to either side.
Scene line_scene(std::vector<ObstacleCircle> obstacles, double fov = 400.0) {
  Scene s;
  s.robots = {{{0, 0}, 32}, {{100, -100}, 32}, {{-100, -100}, 32}};
  s.master = 0;
  s.slaves = {1, 2};
  s.heading = {0, 1};
  s.obstacles = std::move(obstacles);
  s.fov = fov;
  s.look_ahead = 100.0;
  return s;
}

double lateral(Vec2 p) { return dot(p, Vec2{0, 1}.perp()); }

}  // namespace

TEST_SUITE("obstacle") {

TEST_CASE("circle_from_observation") {
  const auto sq = circle_from_polygon(box({0.5, 0.5}, 0.5));
  CHECK(sq.center.x == doctest::Approx(0.5));
  CHECK(sq.center.y == doctest::Approx(0.5));
  CHECK(sq.radius == doctest::Approx(std::sqrt(0.5)));

  const auto pack = circle_from_polygon(box({40, 70}, 18));
  CHECK(pack.center.x == doctest::Approx(40));
  CHECK(pack.center.y == doctest::Approx(70));
  CHECK(pack.radius == doctest::Approx(18 * std::sqrt(2.0)));

  const auto tri = circle_from_polygon({{0, 0}, {2, 0}, {0, 2}});
  CHECK(tri.center.x == doctest::Approx(2.0 / 3.0));
  CHECK(tri.center.y == doctest::Approx(2.0 / 3.0));
  CHECK(tri.radius == doctest::Approx(std::hypot(4.0 / 3.0, 2.0 / 3.0)));

  // Zero area: vertex centroid.
  const auto flat = circle_from_polygon({{0, 0}, {2, 0}, {4, 0}});
  CHECK(flat.center.x == doctest::Approx(2.0));
  CHECK(flat.radius == doctest::Approx(2.0));
}

TEST_CASE("observe: clipped to the sensor footprint") {
  const auto whole = observe(3, box({0, 0}, 10), {0, 0}, 100);
  REQUIRE(whole);
  CHECK(std::abs(signed_area(whole->polygon)) == doctest::Approx(400.0).epsilon(1e-6));
  CHECK(whole->obstacle_id == 3);
  CHECK_FALSE(observe(3, box({500, 0}, 10), {0, 0}, 100));
  const auto part = observe(1, box({100, 0}, 20), {0, 0}, 100);
  REQUIRE(part);
  const double a = std::abs(signed_area(part->polygon));
  CHECK(a > 0.0);
  CHECK(a < 1600.0);
  CHECK(is_simple(part->polygon));
  // The partial circle is centred toward the sensor.
  CHECK(circle_from_observation(*part).center.x < 100.0);
}

TEST_CASE("group_or_separate: worked radii") {
  const ObstacleCircle a{{0, 0}, 35, {0}}, b{{90, 0}, 35, {1}};
  const auto g = group_or_separate(a, b, 64);
  REQUIRE(g);
  CHECK(g->radius == doctest::Approx(80.0));
  CHECK(g->center.x == doctest::Approx(45.0));
  CHECK(g->members == std::vector<int>{0, 1});
  CHECK_FALSE(group_or_separate(a, {{150, 0}, 35, {1}}, 64));
  const ObstacleCircle inner{{5, 0}, 10, {2}};
  const auto c = group_or_separate(a, inner, 64);
  REQUIRE(c);
  CHECK(c->center == a.center);
  CHECK(c->radius == a.radius);
  CHECK_THROWS_AS(group_or_separate(a, b, 0.0), Error);
}

TEST_CASE("group_or_separate: threshold and containment over random pairs") {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> R(1.0, 80.0), P(-300.0, 300.0), A(0.0, 2 * std::numbers::pi);
  for (int k = 0; k < 1000; ++k) {
    const ObstacleCircle c1{{P(rng), P(rng)}, R(rng), {0}};
    const double r2 = R(rng), d = R(rng), th = A(rng);
    const double thresh = d + c1.radius + r2;
    auto at = [&](double dist) {
      return ObstacleCircle{c1.center + Vec2{std::cos(th), std::sin(th)} * dist, r2, {1}};
    };
    // Bisection on the centre distance finds the flip at d + r1 + r2.
    double lo = 0.0, hi = 2.0 * thresh + 10.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (group_or_separate(c1, at(mid), d) ? lo : hi) = mid;
    }
    CHECK(hi == doctest::Approx(thresh).epsilon(1e-9));

    const auto c2 = at(P(rng) * 0.5 + 150.0);
    const auto g = enclosing_circle(c1, c2);
    for (const auto* m : {&c1, &c2})
      for (int s = 0; s < 360; ++s) {
        const double a = s * std::numbers::pi / 180.0;
        const Vec2 p = m->center + Vec2{std::cos(a), std::sin(a)} * m->radius;
        CHECK(distance(p, g.center) <= g.radius + 1e-9);
      }
  }
}

TEST_CASE("group_obstacles: fixpoint with caps") {
  std::vector<ObstacleCircle> cs{{{0, 0}, 25, {0}}, {{0, 60}, 25, {1}}, {{0, 120}, 25, {2}},
                                 {{500, 0}, 25, {3}}};
  const auto g = group_obstacles(cs, 64);
  REQUIRE(g.size() == 2);
  CHECK(g[0].members == std::vector<int>{0, 1, 2});
  CHECK(g[1].members == std::vector<int>{3});
  // A tight radius cap keeps them apart.
  const auto capped = group_obstacles(cs, 64, {60.0, 3});
  CHECK(capped.size() == 3);
  const auto two = group_obstacles(cs, 64, {150.0, 2});
  CHECK(two.size() == 3);
}

TEST_CASE("detect_mode: single box on a slave path") {
  auto box_c = circle_from_polygon(box({100, -30}, 18), {0});
  auto s = line_scene({box_c}, 220.0);
  auto ev = detect_mode(s);
  CHECK(ev.mode == Mode::single);
  CHECK(ev.threatened == std::vector<int>{1});
  CHECK_FALSE(ev.fallback);
  const auto plan = single_obstacle_plan(s, ev);
  REQUIRE(plan);
  CHECK(plan->strategy == "slave");
  CHECK_FALSE(plan->master_detour);
  REQUIRE(plan->robot_lateral[1]);
  // Slave goes around the outside with r + R + margin lateral clearance.
  CHECK(std::abs(*plan->robot_lateral[1] - lateral(box_c.center)) ==
        doctest::Approx(box_c.radius + 32 + 2));
  CHECK(*plan->robot_lateral[1] < lateral({100, 0}));
  CHECK_FALSE(plan->robot_lateral[2]);
  REQUIRE(ev.A);
  REQUIRE(ev.SP1);
  // Projection onto the slave line is perpendicular.
  const Vec2 dir = (s.robots[1].center - s.robots[2].center).normalized();
  CHECK(std::abs(dot(*ev.SP1 - *ev.A, dir)) < 1e-9);
}

TEST_CASE("detect_mode: box on the master path → master detour, slaves hold") {
  const ObstacleCircle o{{0, 60}, 35, {0}};
  auto s = line_scene({o}, 220.0);
  auto ev = detect_mode(s);
  REQUIRE(ev.mode == Mode::single);
  const auto plan = single_obstacle_plan(s, ev);
  REQUIRE(plan);
  CHECK(plan->strategy == "master");
  CHECK(plan->master_detour);
  REQUIRE(plan->master_lateral);
  CHECK(std::abs(*plan->master_lateral - lateral(o.center)) >= 35 + 32);
  CHECK(plan->hold_lateral[1]);
  CHECK(plan->hold_lateral[2]);
  CHECK_FALSE(plan->robot_lateral[1]);
  CHECK_FALSE(plan->robot_lateral[2]);
}

TEST_CASE("single plan: nearly tangent obstacle keeps exactly r + R + margin") {
  const ObstacleCircle o{{-66.9, 60}, 35, {0}};
  auto s = line_scene({o}, 220.0);
  auto ev = detect_mode(s);
  REQUIRE(ev.mode == Mode::single);
  const auto plan = single_obstacle_plan(s, ev, {2.0});
  REQUIRE(plan);
  CHECK(std::abs(*plan->master_lateral - lateral(o.center)) == doctest::Approx(35 + 32 + 2));
}

TEST_CASE("single plan: a miss downgrades to none") {
  const ObstacleCircle o{{0, 60}, 35, {0}};
  auto s = line_scene({o}, 220.0);
  AvoidanceEvent ev;
  ev.mode = Mode::single;
  ev.obstacles = {0};
  ev.threatened = {1};  // the slave's line misses the circle
  CHECK_FALSE(single_obstacle_plan(s, ev));
  CHECK(ev.mode == Mode::none);
}

TEST_CASE("detect_mode: nothing nearby") {
  auto s = line_scene({{{900, 900}, 30, {0}}}, 220.0);
  CHECK(detect_mode(s).mode == Mode::none);
  CHECK(detect_mode(line_scene({}, 220.0)).mode == Mode::none);
}

TEST_CASE("facing obstacles: pass, squeeze, queue") {
  SUBCASE("wide corridor keeps the formation") {
    auto s = line_scene({{{200, 60}, 35, {0}}, {{-200, 60}, 35, {1}}});
    auto ev = detect_mode(s);
    CHECK(ev.mode == Mode::facing);
    CHECK(ev.facing == FacingCase::pass);
    const auto plan = facing_obstacles_plan(s, ev);
    CHECK(plan.strategy == "pass");
    for (const auto& l : plan.robot_lateral) CHECK_FALSE(l);
  }
  SUBCASE("symmetric squeeze") {
    auto s = line_scene({{{140, 60}, 35, {0}}, {{-140, 60}, 35, {1}}});
    auto ev = detect_mode(s);
    REQUIRE(ev.mode == Mode::facing);
    CHECK(ev.facing == FacingCase::squeeze);
    REQUIRE(ev.C);
    CHECK(lateral(*ev.C) == doctest::Approx(0.0));
    const auto plan = facing_obstacles_plan(s, ev);
    CHECK(plan.strategy == "squeeze");
    CHECK(*plan.master_lateral == doctest::Approx(0.0));
    REQUIRE(plan.robot_lateral[1]);
    REQUIRE(plan.robot_lateral[2]);
    // Pulled inside [SP1, SP2] by R + margin, symmetrically.
    CHECK(*plan.robot_lateral[1] == doctest::Approx(-(140 - 35 - 32 - 2)));
    CHECK(*plan.robot_lateral[2] == doctest::Approx(140 - 35 - 32 - 2));
    const Vec2 dir = (s.robots[1].center - s.robots[2].center).normalized();
    CHECK(std::abs(dot(*ev.SP1 - *ev.A, dir)) < 1e-9);
    CHECK(std::abs(dot(*ev.SP2 - *ev.B, dir)) < 1e-9);
  }
  SUBCASE("asymmetric squeeze moves C by half the asymmetry") {
    auto s = line_scene({{{120, 60}, 35, {0}}, {{-160, 60}, 35, {1}}});
    auto ev = detect_mode(s);
    REQUIRE(ev.facing == FacingCase::squeeze);
    CHECK(lateral(*ev.C) == doctest::Approx(lateral({-20, 0})));
  }
  SUBCASE("narrow gap is a queue, reported unsupported") {
    auto s = line_scene({{{80, 60}, 35, {0}}, {{-80, 60}, 35, {1}}});
    auto ev = detect_mode(s);
    REQUIRE(ev.mode == Mode::facing);
    CHECK(ev.facing == FacingCase::queue);
    CHECK(facing_obstacles_plan(s, ev).unsupported);
  }
}

TEST_CASE("squeeze: slaves stacked by the clamp are spread apart") {
  auto s = line_scene({{{95, 60}, 35, {0}}, {{-95, 60}, 35, {1}}});
  s.robots[0].radius = 10;  // small master so the gap reads as a squeeze
  auto ev = detect_mode(s);
  REQUIRE(ev.facing == FacingCase::squeeze);
  const auto plan = facing_obstacles_plan(s, ev);
  const double a = plan.robot_lateral[1].value_or(lateral(s.robots[1].center));
  const double b = plan.robot_lateral[2].value_or(lateral(s.robots[2].center));
  CHECK(std::abs(a - b) >= 32 + 32 + 2 - 1e-9);
}

TEST_CASE("detect_mode is a pure function of the scene") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> P(-250.0, 250.0), R(10.0, 60.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<ObstacleCircle> obs;
    for (int j = 0; j < 3; ++j) obs.push_back({{P(rng), P(rng)}, R(rng), {j}});
    const auto s = line_scene(obs, 220.0);
    const auto a = detect_mode(s), b = detect_mode(s);
    CHECK(a.mode == b.mode);
    CHECK(a.facing == b.facing);
    CHECK(a.obstacles == b.obstacles);
    CHECK(a.threatened == b.threatened);
    CHECK(a.SP1.has_value() == b.SP1.has_value());
    for (const auto& p : {a.A, a.B, a.SP1, a.SP2, a.C, a.SD1, a.SD2})
      if (p) CHECK(p->finite());
  }
}

}  // TEST_SUITE
