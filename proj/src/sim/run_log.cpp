#include "niform/sim/run_log.hpp"

#include <cmath>
#include <cstdio>

namespace niform::sim {

std::string fmt_num(double v, int precision) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos) s = std::string(buf).substr(s[0] == '-' ? 1 : 0);
  return s;
}

void RunLog::write_table(std::ostream& os) const {
  os << "step,t,waypoint,phase,mode,turning,residual_cm,consensus_error_cm,clearance_cm";
  for (std::size_t i = 0; i < agent_names.size(); ++i) {
    const std::string p = "a" + std::to_string(i + 1) + "_";
    os << ',' << p << "x_m," << p << "y_m," << p << "vx_mps," << p << "vy_mps," << p << "yaw_rad,"
       << p << "wz_radps," << p << "ux_mps," << p << "uy_mps," << p << "uw_radps";
  }
  os << '\n';
  for (const auto& r : rows) {
    os << r.step << ',' << fmt_num(r.t, 4) << ',' << r.waypoint << ',' << r.phase << ',' << r.mode
       << ',' << (r.turning ? 1 : 0) << ',' << fmt_num(r.residual, 4) << ','
       << fmt_num(r.consensus_error, 4) << ',' << fmt_num(r.clearance, 4);
    for (const auto& a : r.agents) {
      os << ',' << fmt_num(a.position.x / 100.0) << ',' << fmt_num(a.position.y / 100.0) << ','
         << fmt_num(a.velocity.x / 100.0) << ',' << fmt_num(a.velocity.y / 100.0) << ','
         << fmt_num(a.yaw) << ',' << fmt_num(a.yaw_rate) << ',' << fmt_num(a.command.vx / 100.0)
         << ',' << fmt_num(a.command.vy / 100.0) << ',' << fmt_num(a.command.omega);
    }
    os << '\n';
  }
}

void RunLog::write_summary(std::ostream& os) const {
  const auto& s = summary;
  os << "# niform run summary\n";
  os << "scenario = " << s.scenario << '\n';
  os << "architecture = " << s.architecture << '\n';
  os << "dt_s = " << fmt_num(s.dt) << '\n';
  os << "steps = " << s.steps << '\n';
  os << "final_time_s = " << fmt_num(s.final_time, 4) << '\n';
  os << "seed = " << s.seed << '\n';
  os << "noise_std_cm = " << fmt_num(s.noise_std, 4) << '\n';
  os << "final_waypoint_reached = " << (s.final_waypoint_reached ? "true" : "false") << '\n';
  os << "arrival_time_s = " << (s.arrival_time ? fmt_num(*s.arrival_time, 4) : "none") << '\n';
  os << "max_consensus_error_cm = " << fmt_num(s.max_consensus_error, 4) << '\n';
  os << "relative_rms_cm = " << fmt_num(s.relative_rms, 4) << '\n';
  os << "relative_worst_cm = " << fmt_num(s.relative_worst, 4) << '\n';
  os << "min_obstacle_clearance_cm = " << fmt_num(s.min_clearance, 4) << '\n';
  os << "min_robot_separation_cm = " << fmt_num(s.min_separation, 4) << '\n';
  os << "collision = " << (s.collision ? "true" : "false") << '\n';
  os << "divergence = " << (s.divergence ? "true" : "false") << '\n';
  if (s.divergence) os << "divergence_message = " << s.divergence_message << '\n';
  os << "transitions = " << transitions.size() << '\n';
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const auto& t = transitions[k];
    os << "transition." << k << " = start_s=" << fmt_num(t.start, 4) << " duration_s="
       << fmt_num(t.duration, 4) << " cause=" << t.cause
       << " settle_s=" << (t.settle ? fmt_num(*t.settle, 4) : "none")
       << " first_converged_s=" << (t.first_converged ? fmt_num(*t.first_converged, 4) : "none")
       << '\n';
  }
  os << "avoidance_events = " << avoidance.size() << '\n';
  for (std::size_t k = 0; k < avoidance.size(); ++k) {
    const auto& a = avoidance[k];
    os << "avoidance." << k << " = start_s=" << fmt_num(a.start, 4)
       << " end_s=" << (a.end ? fmt_num(*a.end, 4) : "none") << " mode=" << a.mode
       << " strategy=" << a.strategy << " obstacles=";
    for (std::size_t j = 0; j < a.obstacles.size(); ++j) os << (j ? "+" : "") << a.obstacles[j] + 1;
    os << " path_clearance_cm=" << fmt_num(a.path_clearance, 4)
       << " restored_error_cm=" << (a.restored_error ? fmt_num(*a.restored_error, 4) : "none") << '\n';
  }
  for (std::size_t i = 0; i < s.final_positions.size(); ++i)
    os << "final_position." << (i < agent_names.size() ? agent_names[i] : std::to_string(i + 1))
       << "_cm = " << fmt_num(s.final_positions[i].x, 4) << ' ' << fmt_num(s.final_positions[i].y, 4)
       << '\n';
}

void RunLog::write_events(std::ostream& os) const {
  for (const auto& e : events) {
    os << "t=" << fmt_num(e.t, 4) << " event=" << e.kind;
    for (const auto& [k, v] : e.fields) os << ' ' << k << '=' << v;
    os << '\n';
  }
}

}  // namespace niform::sim
