#include <cmath>
#include <future>

#include "niform/error.hpp"
#include "niform/lti/polynomial.hpp"
#include "niform/sim/world.hpp"

namespace niform::sim {

double follower_lag(const lti::TransferFunction& plant, double gain) {
  const double k = std::abs(gain);
  if (k == 0.0) return 0.0;
  // Value and first derivative at s = 0 from the two lowest coefficients.
  auto at0 = [](const std::vector<double>& c, int d) {
    const auto n = c.size();
    return n > static_cast<std::size_t>(d) ? c[n - 1 - static_cast<std::size_t>(d)] : 0.0;
  };
  const auto& num = plant.numerator();
  const auto& den = plant.denominator();
  const double n0 = at0(num, 0), n1 = at0(num, 1), d0 = at0(den, 0), d1 = at0(den, 1);
  const double cl0 = d0 + k * n0, cl1 = d1 + k * n1;
  if (n0 == 0.0 || cl0 == 0.0) throw Error("follower_lag: loop has no finite DC gain");
  return -(n1 / n0 - cl1 / cl0);
}

Scenario apply_overrides(Scenario s, const Overrides& o) {
  if (o.baseline) s.baseline = *o.baseline;
  if (o.dt) {
    if (!(*o.dt > 0.0) || !std::isfinite(*o.dt)) throw ScenarioError("--dt", "must be > 0");
    const bool one_step = s.horizon && std::abs(*s.horizon - s.dt) < 1e-15;
    s.dt = *o.dt;
    if (one_step) s.horizon = s.dt;
  }
  if (o.seed) s.seed = *o.seed;
  if (o.noise_profile) {
    s.noise_profile = *o.noise_profile;
    s.noise_std = noise_profile_std(*o.noise_profile);
  }
  return s;
}

namespace {

double mean_settle(const RunLog& log) {
  double sum = 0.0;
  int n = 0;
  for (const auto& tr : log.transitions)
    if (tr.settle) {
      sum += *tr.settle;
      ++n;
    }
  return n > 0 ? sum / n : std::nan("");
}

double worst_settle(const RunLog& log) {
  double w = log.transitions.empty() ? std::nan("") : 0.0;
  for (const auto& tr : log.transitions)
    w = tr.settle ? std::max(w, *tr.settle) : INFINITY;
  return w;
}

}  // namespace

Comparison compare(const Scenario& scenario) {
  Scenario enh = scenario, base = scenario;
  enh.baseline = false;
  base.baseline = true;
  auto fb = std::async(std::launch::async, [&base] { return run(base); });
  Comparison c;
  c.enhanced = run(enh);
  c.baseline = fb.get();
  if (c.enhanced.rows.size() < 2 || c.baseline.rows.size() < 2)
    throw Error("compare: run produced no metrics (zero duration)");
  const auto& e = c.enhanced.summary;
  const auto& b = c.baseline.summary;
  c.rows = {
      {"relative_rms_cm", e.relative_rms, b.relative_rms},
      {"relative_worst_cm", e.relative_worst, b.relative_worst},
      {"max_consensus_error_cm", e.max_consensus_error, b.max_consensus_error},
      {"mean_settle_s", mean_settle(c.enhanced), mean_settle(c.baseline)},
      {"worst_settle_s", worst_settle(c.enhanced), worst_settle(c.baseline)},
      {"arrival_time_s", e.arrival_time.value_or(INFINITY), b.arrival_time.value_or(INFINITY)},
  };
  return c;
}

}  // namespace niform::sim
