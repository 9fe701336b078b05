#include "ppc/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace ppc {

std::vector<int> Topology::leaders() const {
  std::vector<int> out(n_leaders());
  std::iota(out.begin(), out.end(), n_followers + 1);
  return out;
}

namespace {

bool connected(int n, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> adj(n + 1);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n + 1, 0);
  std::vector<int> stack{1};
  seen[1] = 1;
  int count = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    ++count;
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

}  // namespace

Topology build_topology(int n, const std::vector<Edge>& edges,
                        const std::vector<int>& leaders) {
  if (n < 2) throw NotATree("need at least 2 vertices");
  if (edges.empty()) throw NotATree("edge list is empty");
  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : edges) {
    if (a < 1 || a > n || b < 1 || b > n)
      throw NotATree("edge vertex out of range");
    if (a == b) throw DuplicateEdge("self-loop");
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second) throw DuplicateEdge("duplicate edge");
  }
  if (static_cast<int>(edges.size()) != n - 1)
    throw NotATree("edge count must be n-1");
  if (!connected(n, edges)) throw NotATree("graph is not connected");

  if (leaders.empty()) throw BadPartition("leader set is empty");
  std::set<int> ls(leaders.begin(), leaders.end());
  if (static_cast<int>(ls.size()) != static_cast<int>(leaders.size()))
    throw BadPartition("repeated leader index");
  int n_l = static_cast<int>(ls.size());
  // Leaders must be the trailing indices n_f+1..n.
  for (int v = n - n_l + 1; v <= n; ++v) {
    if (!ls.count(v))
      throw BadPartition("leaders must be the highest-indexed vertices");
  }
  for (int v : ls) {
    if (v < 1 || v > n) throw BadPartition("leader index out of range");
  }
  Topology t;
  t.n = n;
  t.edges = edges;
  t.n_followers = n - n_l;
  return t;
}

Topology make_chain(int n, int n_f) {
  if (n < 2) throw NotATree("chain needs at least 2 vertices");
  if (n_f < 1 || n_f >= n) throw BadPartition("need 1 <= n_f < n");
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back(i, i + 1);
  std::vector<int> leaders;
  for (int v = n_f + 1; v <= n; ++v) leaders.push_back(v);
  return build_topology(n, edges, leaders);
}

Topology make_star(int n, const std::vector<int>& leaders) {
  if (n < 2) throw NotATree("star needs at least 2 vertices");
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back(i, n);
  return build_topology(n, edges, leaders);
}

DerivedMatrices derive_matrices(const Topology& t) {
  const int n = t.n;
  const int m = t.m();
  const int nf = t.n_followers;
  const int nl = t.n_leaders();
  DerivedMatrices dm;
  dm.D = Eigen::MatrixXd::Zero(n, m);
  for (int k = 0; k < m; ++k) {
    dm.D(t.edges[k].first - 1, k) = 1.0;
    dm.D(t.edges[k].second - 1, k) = -1.0;
  }
  dm.L = dm.D * dm.D.transpose();
  dm.Le = dm.D.transpose() * dm.D;
  dm.Df = dm.D.topRows(nf);
  dm.Di = dm.D.bottomRows(nl);
  dm.DiTDi = dm.Di.transpose() * dm.Di;
  dm.B = Eigen::MatrixXd::Zero(n, nl);
  dm.B.bottomRows(nl) = Eigen::MatrixXd::Identity(nl, nl);
  return dm;
}

NodePartition node_partition(const DerivedMatrices& dm) {
  NodePartition p;
  p.A_f = dm.Df * dm.Df.transpose();
  p.B_f = dm.Df * dm.Di.transpose();
  p.A_i = dm.Di * dm.Di.transpose();
  return p;
}

}  // namespace ppc
