#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ppc {

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotATree : GraphError {
  using GraphError::GraphError;
};
struct BadPartition : GraphError {
  using GraphError::GraphError;
};
struct DuplicateEdge : GraphError {
  using GraphError::GraphError;
};

/// Oriented edge, 1-based vertex indices. The head carries +1 in the
/// incidence matrix, the tail -1, so edge k contributes the relative
/// state xbar_k = x_head - x_tail.
using Edge = std::pair<int, int>;

/// A validated tree communication graph with a leader/follower split.
/// Followers occupy indices 1..n_f, leaders n_f+1..n.
struct Topology {
  int n = 0;
  std::vector<Edge> edges;
  int n_followers = 0;

  int m() const { return static_cast<int>(edges.size()); }
  int n_leaders() const { return n - n_followers; }
  bool is_leader(int v) const { return v > n_followers; }
  std::vector<int> leaders() const;
};

struct DerivedMatrices {
  Eigen::MatrixXd D;      // n x m incidence
  Eigen::MatrixXd L;      // n x n graph Laplacian, D * D^T
  Eigen::MatrixXd Le;     // m x m edge Laplacian, D^T * D
  Eigen::MatrixXd Df;     // follower rows of D, n_f x m
  Eigen::MatrixXd Di;     // leader rows of D, n_l x m
  Eigen::MatrixXd DiTDi;  // m x m
  Eigen::MatrixXd B;      // n x n_l input matrix
};

struct NodePartition {
  Eigen::MatrixXd A_f;  // Df * Df^T
  Eigen::MatrixXd B_f;  // Df * Di^T
  Eigen::MatrixXd A_i;  // Di * Di^T
};

Topology build_topology(int n, const std::vector<Edge>& edges,
                        const std::vector<int>& leaders);

/// Chain 1-2-...-n with edges e_i=(i,i+1), leaders {n_f+1..n}.
Topology make_chain(int n, int n_f);

/// Star with centering node n, edges e_i=(i,n) oriented head at the leaf.
Topology make_star(int n, const std::vector<int>& leaders);

DerivedMatrices derive_matrices(const Topology& t);

NodePartition node_partition(const DerivedMatrices& dm);

}  // namespace ppc
