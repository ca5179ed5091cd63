#include "niform/formation/formation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "niform/error.hpp"

namespace niform::formation {

FormationSpec::FormationSpec(std::vector<Phase> phases, std::size_t n_agents, int master)
    : phases_(std::move(phases)), n_(n_agents), master_(master) {
  if (phases_.empty()) throw Error("formation: at least one phase is required");
  std::stable_sort(phases_.begin(), phases_.end(),
                   [](const Phase& a, const Phase& b) { return a.trigger < b.trigger; });
  for (std::size_t k = 0; k < phases_.size(); ++k) {
    auto& p = phases_[k];
    const std::string at = "formation phase " + std::to_string(k);
    if (!(p.duration > 0.0) || !std::isfinite(p.duration)) throw Error(at + ": duration must be > 0");
    if (p.offsets.size() != n_) throw Error(at + ": expected " + std::to_string(n_) + " offsets");
    for (const auto& o : p.offsets)
      if (!o.finite()) throw Error(at + ": non-finite offset");
    if (p.yaw_offsets.empty()) p.yaw_offsets.assign(n_, 0.0);
    if (p.yaw_offsets.size() != n_) throw Error(at + ": yaw offsets size mismatch");
    p.offsets[static_cast<std::size_t>(master_)] = Vec2{};
  }
}

std::size_t FormationSpec::phase_index(int waypoint_index) const {
  std::size_t best = 0;
  for (std::size_t k = 0; k < phases_.size(); ++k)
    if (phases_[k].trigger <= waypoint_index) best = k;
  return best;
}

TransitionState begin_transition(std::vector<Vec2> from, std::vector<Vec2> to, double start_time,
                                 double duration) {
  if (from.size() != to.size()) throw Error("begin_transition: offset tables differ in size");
  TransitionState tr;
  tr.active = true;
  tr.start_time = start_time;
  tr.duration = duration;
  tr.dis.resize(to.size());
  tr.participates.resize(to.size());
  for (std::size_t i = 0; i < to.size(); ++i) {
    tr.dis[i] = to[i] - from[i];
    tr.participates[i] = !(tr.dis[i] == Vec2{});
  }
  tr.from = std::move(from);
  tr.to = std::move(to);
  return tr;
}

std::vector<Vec2> transition_velocities(const TransitionState& tr) {
  if (!tr.active) throw Error("transition_velocities: no active transition");
  if (!(tr.duration > 0.0)) throw Error("transition_velocities: duration must be > 0");
  std::vector<Vec2> v(tr.dis.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = tr.dis[i] / tr.duration;
  return v;
}

ConvergenceReport check_convergence(std::span<const Vec2> positions, int master,
                                    const TransitionState& tr, double time, double tol,
                                    double grace_factor) {
  ConvergenceReport r;
  r.residual.assign(positions.size(), Vec2{});
  if (tr.to.size() != positions.size()) throw Error("check_convergence: size mismatch");
  const Vec2 pm = positions[static_cast<std::size_t>(master)];
  bool all = true;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!tr.participates[i]) continue;
    r.residual[i] = tr.to[i] - (positions[i] - pm);
    const double m = std::max(std::abs(r.residual[i].x), std::abs(r.residual[i].y));
    r.max_abs = std::max(r.max_abs, m);
    if (m > tol) all = false;
  }
  if (all)
    r.status = Convergence::converged;
  else if (time > tr.dest() + grace_factor * tr.duration)
    r.status = Convergence::timed_out;
  return r;
}

const std::vector<Vec2>& phase_for(const FormationSpec& spec, double /*time*/, int waypoint_index,
                                   const std::optional<std::vector<Vec2>>& avoidance) {
  if (avoidance) return *avoidance;
  return spec.phases()[spec.phase_index(waypoint_index)].offsets;
}

}  // namespace niform::formation
