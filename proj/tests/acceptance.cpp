// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "niform/controller/controller.hpp"
#include "niform/lti/certify.hpp"
#include "niform/lti/model_library.hpp"
#include "niform/obstacle/obstacle.hpp"
#include "niform/sim/world.hpp"

using namespace niform;

namespace {

const std::filesystem::path kScenarios = NIFORM_SOURCE_DIR "/scenarios";

sim::Scenario shipped(const std::string& name) {
  return sim::load_scenario(kScenarios / (name + ".json"));
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int p = 4) { return sim::fmt_num(v, p); }

Verdict c1_sni() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto lib = lti::ModelLibrary::builtin();
  const auto grid = lti::FrequencyGrid::standard();
  bool ok = true;
  std::string d;
  for (const char* name : {"ugv_velx", "ugv_vely", "uav_velx", "uav_vely"}) {
    const auto c = lti::classify_ni(lib.get(name).tf, grid);
    ok = ok && c.kind == lti::NiClass::sni && c.min_index > 1e-9;
    d += std::string(name) + "=" + lti::to_string(c.kind) + "(min " + num(c.min_index) + ") ";
  }
  const double t = seconds_since(t0);
  ok = ok && t < 1.0;
  return {ok, d + "runtime " + num(t, 3) + " s"};
}

Verdict c2_dc() {
  const auto lib = lti::ModelLibrary::builtin();
  const auto& p = lib.get("uav_velx").tf;
  const double dc = lti::dc_gain(p);
  const auto cert =
      lti::certify_interconnection(p, lti::TransferFunction::gain(-0.7), lti::FrequencyGrid::standard());
  const bool ok = std::abs(dc - 28.58) <= 0.01 && cert.dc_product < 1.0 && cert.stable;
  std::string d = "dc=" + num(dc) + " product=" + num(cert.dc_product) +
                  " certificate=" + (cert.stable ? "stable" : "VIOLATED");
  for (const auto& r : cert.reasons) d += "; " + r;
  return {ok, d};
}

Verdict c3_composite() {
  const auto lib = lti::ModelLibrary::builtin();
  const auto c = lti::series_ni_composition(lib.get("uav_velx").tf,
                                            controller::prediction_term(0.02),
                                            lti::FrequencyGrid::standard());
  return {c.composite_class.kind == lti::NiClass::sni,
          "plant=" + lti::to_string(c.sni_class.kind) + " term=" + lti::to_string(c.ni_class.kind) +
              " composite=" + lti::to_string(c.composite_class.kind) + " (min " +
              num(c.composite_class.min_index) + ")"};
}

Verdict c4_case1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto log = sim::run(shipped("case1"));
  const double t = seconds_since(t0);
  bool ok = !log.transitions.empty() && t < 5.0;
  std::string d = "reach times:";
  for (const auto& tr : log.transitions) {
    const bool in = tr.first_converged && std::abs(*tr.first_converged - 2.0) <= 0.5;
    ok = ok && in;
    d += " " + (tr.first_converged ? num(*tr.first_converged, 3) : std::string("never"));
  }
  return {ok, d + " s; runtime " + num(t, 3) + " s"};
}

Verdict c5_yaw() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto log = sim::run(shipped("case2"));
  const double t = seconds_since(t0);
  bool ok = t < 2.0 && !log.rows.empty();
  std::string d = "final yaw:";
  for (const auto& a : log.rows.back().agents) {
    const double deg = a.yaw * 180.0 / std::numbers::pi;
    ok = ok && std::abs(deg - 90.0) <= 1.0;
    d += " " + num(deg, 3);
  }
  return {ok, d + " deg; runtime " + num(t, 3) + " s"};
}

Verdict c6_enhanced() {
  const auto c = sim::compare(shipped("test1_leg"));
  const double e = c.enhanced.summary.relative_worst, b = c.baseline.summary.relative_worst;
  const bool ok = e < b && b >= 2.0 * e;
  return {ok, "worst enhanced=" + num(e, 3) + " cm baseline=" + num(b, 3) + " cm ratio=" +
                  num(b / e, 3) + " (needs < and >= 2x)"};
}

Verdict c7_c8(bool restoration) {
  bool ok = true;
  std::string d;
  for (const char* name : {"test2_exp1", "test2_exp2", "test3"}) {
    const auto sc = shipped(name);
    const auto log = sim::run(sc);
    if (log.avoidance.empty()) ok = false;
    d += std::string(name) + ":";
    if (restoration) {
      for (const auto& a : log.avoidance) {
        ok = ok && a.restored_error && *a.restored_error <= 5.0;
        d += " " + (a.restored_error ? num(*a.restored_error, 3) : std::string("none"));
      }
    } else {
      double min_c = INFINITY;
      for (const auto& r : log.rows) min_c = std::min(min_c, r.clearance);
      ok = ok && min_c >= 0.0 && !log.summary.collision;
      d += " min=" + num(min_c, 3);
      for (const auto& a : log.avoidance) {
        const double R = sc.agents[0].radius;
        ok = ok && std::abs(a.path_clearance - R) <= 10.0;
        d += " path=" + num(a.path_clearance, 3);
      }
    }
    d += "; ";
  }
  return {ok, d + (restoration ? "(cm, <= 5)" : "(cm, path within 10 of R)")};
}

Verdict c9_grouping() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> R(1.0, 80.0), P(-300.0, 300.0), A(0.0, 2 * std::numbers::pi);
  int bad_threshold = 0, bad_contain = 0;
  for (int k = 0; k < 1000; ++k) {
    const obstacle::ObstacleCircle c1{{P(rng), P(rng)}, R(rng), {0}};
    const double r2 = R(rng), d = R(rng), th = A(rng);
    const Vec2 u{std::cos(th), std::sin(th)};
    auto at = [&](double dist) { return obstacle::ObstacleCircle{c1.center + u * dist, r2, {1}}; };
    const double thresh = d + c1.radius + r2;
    double lo = 0.0, hi = 2.0 * thresh + 10.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (obstacle::group_or_separate(c1, at(mid), d) ? lo : hi) = mid;
    }
    if (std::abs(hi - thresh) > 1e-9 * thresh) ++bad_threshold;
    const auto c2 = at(std::abs(P(rng)) * 0.5);
    const auto g = obstacle::enclosing_circle(c1, c2);
    for (const auto* m : {&c1, &c2})
      for (int s = 0; s < 360; ++s) {
        const double a = s * std::numbers::pi / 180.0;
        const Vec2 p = m->center + Vec2{std::cos(a), std::sin(a)} * m->radius;
        if (distance(p, g.center) > g.radius + 1e-9) ++bad_contain;
      }
  }
  return {bad_threshold == 0 && bad_contain == 0,
          "threshold misses=" + std::to_string(bad_threshold) +
              " containment misses=" + std::to_string(bad_contain) + " over 1000 pairs"};
}

std::string outputs(const sim::RunLog& log) {
  std::ostringstream os;
  log.write_table(os);
  log.write_summary(os);
  log.write_events(os);
  return os.str();
}

Verdict c10_determinism() {
  const auto sc = shipped("test1");
  const auto a = sim::run(sc), b = sim::run(sc);
  const bool same = outputs(a) == outputs(b);
  const auto fine = sim::run(sim::apply_overrides(sc, {.dt = sc.dt / 2}));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.summary.final_positions.size(); ++i)
    worst = std::max(worst, distance(a.summary.final_positions[i], fine.summary.final_positions[i]));
  return {same && worst < 1.0, std::string("identical logs=") + (same ? "yes" : "no") +
                                   " dt-halving final shift=" + num(worst, 4) + " cm (< 1)"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"SNI certification of the four velocity models", c1_sni},
      {"UAV x DC gain 28.58 and stable certificate", c2_dc},
      {"composite plant with prediction term is SNI", c3_composite},
      {"Case-1 transitions reach offsets in 2.0 +/- 0.5 s", c4_case1},
      {"Case-2 yaw consensus to 90 +/- 1 deg", c5_yaw},
      {"enhanced beats baseline by >= 2x on a moving leg", c6_enhanced},
      {"obstacle clearance and path clearance", [] { return c7_c8(false); }},
      {"formation restored within 5 cm after each event", [] { return c7_c8(true); }},
      {"grouping threshold and containment oracle", c9_grouping},
      {"determinism and dt refinement", c10_determinism},
  };
  int failed = 0, k = 0;
  for (const auto& [title, check] : criteria) {
    ++k;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("criterion %2d: %s  %s -- %s\n", k, v.pass ? "PASS" : "FAIL", title, v.detail.c_str());
  }
  std::printf("%d/%d criteria passed\n", k - failed, k);
  return failed == 0 ? 0 : 1;
}
