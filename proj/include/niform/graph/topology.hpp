#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace niform::graph {

// (head, tail), 0-based vertex ids.
using Edge = std::pair<int, int>;

/**
 * Information topology: incidence Q_i (head +1, tail −1), consensus Q_c
 * (tail −1 only) and reference column Q_r (1 for agents tracking the
 * external reference).
 */
class NetworkTopology {
 public:
  int n_agents() const { return n_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& reference_agents() const { return reference_; }
  bool is_reference(int agent) const;

  const Eigen::MatrixXd& incidence() const { return qi_; }
  const Eigen::MatrixXd& consensus() const { return qc_; }
  const Eigen::MatrixXd& reference() const { return qr_; }

  // Edges whose tail is `agent` (the agent consumes these errors).
  std::vector<int> edges_into(int agent) const;

 private:
  friend NetworkTopology build_topology(int, const std::vector<Edge>&, const std::vector<int>&);
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> reference_;
  Eigen::MatrixXd qi_, qc_, qr_;
};

// Throws TopologyError on self-loops, duplicate edges (either orientation),
// out-of-range vertices or an empty vertex set.
NetworkTopology build_topology(int n_agents, const std::vector<Edge>& edges,
                               const std::vector<int>& reference_agents);

struct Expanded {
  Eigen::MatrixXd incidence_ref;  // [Q_i Q_r] ⊗ I_m
  Eigen::MatrixXd consensus_ref;  // [Q_c Q_r] ⊗ I_m
};

Expanded kron_expand(const NetworkTopology& t, int block_dim);

// Q_i Q_iᵀ
Eigen::MatrixXd laplacian(const NetworkTopology& t);

}  // namespace niform::graph
