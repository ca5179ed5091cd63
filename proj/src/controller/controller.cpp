#include "niform/controller/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "niform/error.hpp"

namespace niform::controller {

namespace {

void check_dims(const ControlInputs& in) {
  const auto n = static_cast<std::size_t>(in.topology.n_agents());
  if (in.agents.size() != n || in.offsets.size() != n || in.limits.size() != n ||
      in.gains.consensus.size() != n || (!in.agent_horizon.empty() && in.agent_horizon.size() != n))
    throw Error("controller: topology has " + std::to_string(n) + " agents but inputs disagree");
}

double clamp_abs(double v, double m) { return std::clamp(v, -m, m); }

void saturate(std::vector<ControlCommand>& u, std::span<const Saturation> limits) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i].vx = clamp_abs(u[i].vx, limits[i].v_max);
    u[i].vy = clamp_abs(u[i].vy, limits[i].v_max);
  }
}

}  // namespace

Prediction predict_master(Vec2 v, double dt) {
  if (!(dt > 0.0)) throw Error("predict_master: dt must be > 0");
  return {v.x * dt, v.y * dt};
}

lti::TransferFunction prediction_term(double dt) {
  if (!(dt > 0.0)) throw Error("prediction_term: dt must be > 0");
  return lti::TransferFunction::differentiator(-dt, "prediction");
}

std::vector<ControlCommand> enhanced_control(const ControlInputs& in) {
  check_dims(in);
  const auto& topo = in.topology;
  const int n = topo.n_agents();
  std::vector<ControlCommand> u(static_cast<std::size_t>(n));
#pragma omp parallel for if (n > 64)
  for (int i = 0; i < n; ++i) {
    const auto& me = in.agents[static_cast<std::size_t>(i)];
    ControlCommand c;
    if (topo.is_reference(i)) {
      c.vx += in.gains.reference.x * (in.reference.x + me.position.x);
      c.vy += in.gains.reference.y * (in.reference.y + me.position.y);
    }
    const auto& k = in.gains.consensus[static_cast<std::size_t>(i)];
    const double h_i =
        in.agent_horizon.empty() ? in.horizon : in.agent_horizon[static_cast<std::size_t>(i)];
    for (int e : topo.edges_into(i)) {
      const int h = topo.edges()[static_cast<std::size_t>(e)].first;
      const auto& head = in.agents[static_cast<std::size_t>(h)];
      const Vec2 xf = in.offsets[static_cast<std::size_t>(i)] - in.offsets[static_cast<std::size_t>(h)];
      const Vec2 ef = xf + head.position - me.position + head.velocity * h_i;
      const double qc = topo.consensus()(i, e);
      c.vx += qc * k.x * ef.x;
      c.vy += qc * k.y * ef.y;
    }
    u[static_cast<std::size_t>(i)] = c;
  }
  saturate(u, in.limits);
  return u;
}

std::vector<ControlCommand> baseline_control(const ControlInputs& in) {
  check_dims(in);
  const auto& topo = in.topology;
  const int n = topo.n_agents(), L = topo.n_edges();
  const auto ex = graph::kron_expand(topo, 2);

  Eigen::VectorXd y(2 * n);
  for (int i = 0; i < n; ++i) {
    y(2 * i) = in.agents[static_cast<std::size_t>(i)].position.x;
    y(2 * i + 1) = in.agents[static_cast<std::size_t>(i)].position.y;
  }
  Eigen::VectorXd bias(2 * (L + 1));
  Eigen::VectorXd k(2 * (L + 1));
  for (int e = 0; e < L; ++e) {
    const auto [h, t] = topo.edges()[static_cast<std::size_t>(e)];
    const Vec2 xf = in.offsets[static_cast<std::size_t>(t)] - in.offsets[static_cast<std::size_t>(h)];
    bias(2 * e) = xf.x;
    bias(2 * e + 1) = xf.y;
    k(2 * e) = in.gains.consensus[static_cast<std::size_t>(t)].x;
    k(2 * e + 1) = in.gains.consensus[static_cast<std::size_t>(t)].y;
  }
  bias(2 * L) = in.reference.x;
  bias(2 * L + 1) = in.reference.y;
  k(2 * L) = in.gains.reference.x;
  k(2 * L + 1) = in.gains.reference.y;

  const Eigen::VectorXd ybar = ex.incidence_ref.transpose() * y;
  const Eigen::VectorXd ef = ybar + bias;
  const Eigen::VectorXd uv = ex.consensus_ref * k.cwiseProduct(ef);

  std::vector<ControlCommand> u(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = {uv(2 * i), uv(2 * i + 1), 0.0};
  saturate(u, in.limits);
  return u;
}

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

std::vector<double> yaw_consensus(const YawInputs& in) {
  const auto& topo = in.topology;
  const auto n = static_cast<std::size_t>(topo.n_agents());
  if (in.agents.size() != n || in.yaw_offsets.size() != n || in.has_yaw.size() != n ||
      in.limits.size() != n)
    throw Error("yaw_consensus: inputs disagree with topology size");
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in.has_yaw[i]) continue;
    const auto& me = in.agents[i];
    double c = 0.0;
    if (topo.is_reference(static_cast<int>(i)))
      c += in.gains.reference_yaw * wrap_angle(-in.yaw_target + me.yaw);
    for (int e : topo.edges_into(static_cast<int>(i))) {
      const auto h = static_cast<std::size_t>(topo.edges()[static_cast<std::size_t>(e)].first);
      if (!in.has_yaw[h]) continue;
      const auto& head = in.agents[h];
      const double ef = wrap_angle(in.yaw_offsets[i] - in.yaw_offsets[h] + head.yaw - me.yaw) +
                        head.yaw_rate * in.horizon;
      c += topo.consensus()(static_cast<Eigen::Index>(i), e) * in.gains.consensus_yaw * ef;
    }
    w[i] = clamp_abs(c, in.limits[i].omega_max);
  }
  return w;
}

double heading_from_motion(Vec2 setpoint, Vec2 current, double previous) {
  const Vec2 d = setpoint - current;
  if (d.x == 0.0 && d.y == 0.0) return previous;
  return std::atan2(d.y, d.x);
}

NiGains adaptive_gains(const NiGains& base, const AdaptiveRequest& req) {
  if (!(req.duration > 0.0)) throw Error("adaptive_gains: transition duration must be > 0");
  const std::size_t n = base.consensus.size();
  if (req.displacement.size() != n || req.start_error.size() != n || req.participates.size() != n)
    throw Error("adaptive_gains: per-agent vectors disagree with gain table");
  auto solve = [&](double base_k, double dis, double err) {
    if (dis == 0.0 || std::abs(err) < 1e-9) return base_k;
    return -std::abs(dis) / (req.duration * std::abs(err));
  };
  NiGains g = base;
  for (std::size_t i = 0; i < n; ++i) {
    if (!req.participates[i]) continue;
    const Vec2 dis = req.displacement[i], err = req.start_error[i];
    if (req.reference_leg && static_cast<int>(i) == req.reference_agent) {
      g.reference.x = solve(base.reference.x, dis.x, err.x);
      g.reference.y = solve(base.reference.y, dis.y, err.y);
    } else {
      g.consensus[i].x = solve(base.consensus[i].x, dis.x, err.x);
      g.consensus[i].y = solve(base.consensus[i].y, dis.y, err.y);
    }
  }
  return g;
}

}  // namespace niform::controller
