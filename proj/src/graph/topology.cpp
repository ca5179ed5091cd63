#include "niform/graph/topology.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <unsupported/Eigen/KroneckerProduct>

#include "niform/error.hpp"

namespace niform::graph {

bool NetworkTopology::is_reference(int agent) const {
  return std::find(reference_.begin(), reference_.end(), agent) != reference_.end();
}

std::vector<int> NetworkTopology::edges_into(int agent) const {
  std::vector<int> out;
  for (int e = 0; e < n_edges(); ++e)
    if (edges_[static_cast<std::size_t>(e)].second == agent) out.push_back(e);
  return out;
}

NetworkTopology build_topology(int n_agents, const std::vector<Edge>& edges,
                               const std::vector<int>& reference_agents) {
  if (n_agents <= 0) throw TopologyError("topology has no agents");
  std::set<std::pair<int, int>> seen;
  for (const auto& [h, t] : edges) {
    const std::string e = "(" + std::to_string(h + 1) + "," + std::to_string(t + 1) + ")";
    if (h < 0 || t < 0 || h >= n_agents || t >= n_agents)
      throw TopologyError("edge " + e + " references a missing vertex");
    if (h == t) throw TopologyError("edge " + e + " is a self-loop");
    if (!seen.insert({std::min(h, t), std::max(h, t)}).second)
      throw TopologyError("edge " + e + " is a duplicate");
  }
  std::set<int> refs;
  for (int r : reference_agents) {
    if (r < 0 || r >= n_agents)
      throw TopologyError("reference agent " + std::to_string(r + 1) + " is not a vertex");
    if (!refs.insert(r).second)
      throw TopologyError("reference agent " + std::to_string(r + 1) + " listed twice");
  }

  NetworkTopology t;
  t.n_ = n_agents;
  t.edges_ = edges;
  t.reference_ = reference_agents;
  const auto L = static_cast<Eigen::Index>(edges.size());
  t.qi_ = Eigen::MatrixXd::Zero(n_agents, L);
  t.qc_ = Eigen::MatrixXd::Zero(n_agents, L);
  t.qr_ = Eigen::MatrixXd::Zero(n_agents, 1);
  for (Eigen::Index e = 0; e < L; ++e) {
    const auto& [h, tl] = edges[static_cast<std::size_t>(e)];
    t.qi_(h, e) = 1.0;
    t.qi_(tl, e) = -1.0;
    t.qc_(tl, e) = -1.0;
  }
  for (int r : reference_agents) t.qr_(r, 0) = 1.0;
  return t;
}

Expanded kron_expand(const NetworkTopology& t, int block_dim) {
  if (block_dim < 1) throw TopologyError("kron_expand: block_dim must be >= 1");
  const Eigen::Index n = t.n_agents(), L = t.n_edges();
  Eigen::MatrixXd ir(n, L + 1), cr(n, L + 1);
  ir << t.incidence(), t.reference();
  cr << t.consensus(), t.reference();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(block_dim, block_dim);
  return {Eigen::kroneckerProduct(ir, I).eval(), Eigen::kroneckerProduct(cr, I).eval()};
}

Eigen::MatrixXd laplacian(const NetworkTopology& t) {
  return t.incidence() * t.incidence().transpose();
}

}  // namespace niform::graph
