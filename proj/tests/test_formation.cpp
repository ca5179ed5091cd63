#include <random>

#include "doctest.h"
#include "niform/error.hpp"
#include "niform/formation/formation.hpp"
#include "niform/sim/scenario.hpp"
#include "niform/sim/world.hpp"

using namespace niform;
using namespace niform::formation;

namespace {

FormationSpec case1_spec() {
  std::vector<Phase> p{
      {0, {{0, 0}, {100, 50}, {-100, 50}}, {}, 2.0},
      {1, {{0, 0}, {50, 50}, {-50, 50}}, {}, 2.0},
      {2, {{0, 0}, {100, 50}, {-100, 50}}, {}, 2.0},
      {3, {{0, 0}, {100, 0}, {-100, 0}}, {}, 2.0},
  };
  return FormationSpec(p, 3, 0);
}

}  // namespace

TEST_SUITE("formation") {

TEST_CASE("FormationSpec validation") {
  CHECK_THROWS_AS(FormationSpec({}, 3, 0), Error);
  CHECK_THROWS_AS(FormationSpec({{0, {{0, 0}, {1, 1}, {2, 2}}, {}, 0.0}}, 3, 0), Error);
  CHECK_THROWS_AS(FormationSpec({{0, {{0, 0}, {1, 1}}, {}, 2.0}}, 3, 0), Error);
  CHECK_THROWS_AS(FormationSpec({{0, {{0, 0}, {NAN, 1}, {2, 2}}, {}, 2.0}}, 3, 0), Error);
  // Phases are sorted by trigger.
  const FormationSpec s({{2, {{0, 0}, {1, 0}}, {}, 1.0}, {0, {{0, 0}, {2, 0}}, {}, 1.0}}, 2, 0);
  CHECK(s.phases()[0].trigger == 0);
  CHECK(s.phase_index(1) == 0);
  CHECK(s.phase_index(2) == 1);
}

TEST_CASE("transition_velocities") {
  auto tr = begin_transition({{0, 0}, {0, 0}}, {{0, 0}, {50, 0}}, 0.0, 2.0);
  auto v = transition_velocities(tr);
  CHECK(v[1].x == doctest::Approx(25.0));
  CHECK(v[1].y == 0.0);
  CHECK(v[0] == Vec2{});
  CHECK_FALSE(tr.participates[0]);
  CHECK(tr.participates[1]);

  // First vertex change of the rectangle: [100,50] → [50,50].
  const auto spec = case1_spec();
  tr = begin_transition(spec.phases()[0].offsets, spec.phases()[1].offsets, 3.0, 2.0);
  v = transition_velocities(tr);
  CHECK(v[1].x == doctest::Approx(-25.0));
  CHECK(v[1].y == 0.0);
  CHECK(tr.dest() == doctest::Approx(5.0));

  TransitionState idle;
  CHECK_THROWS_AS(transition_velocities(idle), Error);
}

TEST_CASE("transition_velocities integrate to the displacement") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-200.0, 200.0), T(0.2, 5.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<Vec2> from{{0, 0}, {U(rng), U(rng)}, {U(rng), U(rng)}};
    std::vector<Vec2> to{{0, 0}, {U(rng), U(rng)}, {U(rng), U(rng)}};
    const double t = T(rng);
    const auto tr = begin_transition(from, to, 0.0, t);
    const auto v = transition_velocities(tr);
    const int steps = 1000;
    for (std::size_t i = 0; i < 3; ++i) {
      Vec2 p = from[i];
      for (int s = 0; s < steps; ++s) p += v[i] * (t / steps);
      CHECK(p.x == doctest::Approx(to[i].x).epsilon(1e-9).scale(1.0));
      CHECK(p.y == doctest::Approx(to[i].y).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("check_convergence") {
  const auto spec = case1_spec();
  const auto tr = begin_transition(spec.phases()[0].offsets, spec.phases()[1].offsets, 0.0, 2.0);
  const Vec2 m{10, 20};
  std::vector<Vec2> at_target{m, m + Vec2{50, 50}, m + Vec2{-50, 50}};
  CHECK(check_convergence(at_target, 0, tr, 1.0).status == Convergence::converged);
  CHECK(check_convergence(at_target, 0, tr, 1.0).max_abs == 0.0);

  // One slave held at its old offset: in progress until dest + grace, then timed out.
  std::vector<Vec2> held{m, m + Vec2{100, 50}, m + Vec2{-50, 50}};
  CHECK(check_convergence(held, 0, tr, 2.5).status == Convergence::in_progress);
  const auto late = check_convergence(held, 0, tr, 3.01);
  CHECK(late.status == Convergence::timed_out);
  CHECK(late.max_abs == doctest::Approx(50.0));
  CHECK(late.residual[1].x == doctest::Approx(-50.0));

  // Per axis within tolerance.
  std::vector<Vec2> close{m, m + Vec2{54, 46}, m + Vec2{-50, 50}};
  CHECK(check_convergence(close, 0, tr, 0.5).status == Convergence::converged);
  std::vector<Vec2> outside{m, m + Vec2{55.5, 50}, m + Vec2{-50, 50}};
  CHECK(check_convergence(outside, 0, tr, 0.5).status == Convergence::in_progress);
}

TEST_CASE("phase_for: priority and determinism") {
  const auto spec = case1_spec();
  CHECK(phase_for(spec, 0.0, 0, std::nullopt) == spec.phases()[0].offsets);
  CHECK(phase_for(spec, 5.0, 2, std::nullopt) == spec.phases()[2].offsets);
  CHECK(phase_for(spec, 5.0, 9, std::nullopt) == spec.phases()[3].offsets);
  const std::vector<Vec2> avoid{{0, 0}, {30, 0}, {-30, 0}};
  CHECK(phase_for(spec, 5.0, 2, avoid) == avoid);
  // Cleared event: waypoint phase again.
  CHECK(phase_for(spec, 6.0, 2, std::nullopt) == spec.phases()[2].offsets);
  for (int k = 0; k < 5; ++k) CHECK(&phase_for(spec, 1.0, 1, std::nullopt) == &spec.phases()[1].offsets);
}

TEST_CASE("closed loop: transition residual never grows after the first 0.2 s" *
          doctest::may_fail()) {
  // The identified UGV loops are underdamped at the shipped gains; this is
  // checked and reported rather than assumed.
  const auto log = sim::run(sim::load_scenario(NIFORM_SOURCE_DIR "/scenarios/case1.json"));
  REQUIRE(!log.transitions.empty());
  for (std::size_t k = 0; k < log.transitions.size(); ++k) {
    const double a = log.transitions[k].start + 0.2;
    const double b = k + 1 < log.transitions.size() ? log.transitions[k + 1].start : 1e300;
    double prev = 1e300;
    int rises = 0;
    for (const auto& r : log.rows) {
      if (r.t < a || r.t >= b) continue;
      if (r.residual > prev + 1e-9) ++rises;
      prev = r.residual;
    }
    CAPTURE(k);
    CHECK(rises == 0);
  }
}

}  // TEST_SUITE
