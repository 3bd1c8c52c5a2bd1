#pragma once

// Shared graphs and brute-force oracles for tests. Nothing here calls into
// the library's algorithms; the oracles are written from the definitions.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "nie/graph.hpp"
#include "nie/rng.hpp"

namespace nie::test {

inline Graph path3(double p01 = 1.0, double p12 = 1.0) {
  return Graph(3, {{0, 1, p01}, {1, 2, p12}});
}

/// 0->1 (1.0), 0->2 (.5), 1->2 (.5).
inline Graph coin_graph() { return Graph(3, {{0, 1, 1.0}, {0, 2, 0.5}, {1, 2, 0.5}}); }

inline Graph cycle3() { return Graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}); }

inline Graph diamond() { return Graph(4, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 3, 1.0}, {2, 3, 1.0}}); }

/// Random simple digraph. Probabilities come from `probs`, chosen uniformly.
inline Graph random_graph(NodeId n, std::size_t m, std::uint64_t seed,
                          const std::vector<double>& probs = {0.25, 0.5, 0.75, 1.0}) {
  Rng rng(seed);
  m = std::min<std::size_t>(m, static_cast<std::size_t>(n) * (n - 1));
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<Edge> edges;
  while (edges.size() < m) {
    const auto u = static_cast<NodeId>(rng.below(n));
    const auto v = static_cast<NodeId>(rng.below(n));
    if (u == v || !seen.insert({u, v}).second) continue;
    edges.push_back({u, v, probs[rng.below(probs.size())]});
  }
  if (edges.empty()) edges.push_back({0, 1, probs.front()});
  return Graph(n, std::move(edges));
}

/// Random recursive out-tree rooted at 0: node i > 0 hangs off a uniform
/// earlier node.
inline Graph random_tree(NodeId n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId i = 1; i < n; ++i) {
    const auto parent = static_cast<NodeId>(rng.below(i));
    edges.push_back({parent, i, 0.1 + 0.9 * rng.uniform()});
  }
  return Graph(n, std::move(edges));
}

/// A random subset of [0, n) of the requested size, sorted.
inline std::vector<NodeId> random_subset(NodeId n, std::size_t size, Rng& rng,
                                         const std::vector<NodeId>& exclude = {}) {
  std::vector<NodeId> pool;
  for (NodeId v = 0; v < n; ++v) {
    if (std::find(exclude.begin(), exclude.end(), v) == exclude.end()) pool.push_back(v);
  }
  size = std::min(size, pool.size());
  for (std::size_t i = 0; i < size; ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  }
  pool.resize(size);
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();

/// Floyd-Warshall hop distances; kInf when unreachable.
inline std::vector<std::vector<std::uint32_t>> all_pairs(const Graph& g) {
  const NodeId n = g.node_count();
  std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, kInf));
  for (NodeId v = 0; v < n; ++v) d[v][v] = 0;
  for (const Edge& e : g.edges()) d[e.source][e.target] = 1;
  for (NodeId k = 0; k < n; ++k) {
    for (NodeId i = 0; i < n; ++i) {
      if (d[i][k] == kInf) continue;
      for (NodeId j = 0; j < n; ++j) {
        if (d[k][j] == kInf) continue;
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
      }
    }
  }
  return d;
}

inline std::uint32_t set_distance(const std::vector<std::vector<std::uint32_t>>& d,
                                  const std::vector<NodeId>& s, NodeId v) {
  std::uint32_t best = kInf;
  for (NodeId u : s) best = std::min(best, d[u][v]);
  return best;
}

/// Directed clustering from explicit triple enumeration over the symmetrized
/// weights w_ij = a_ij + a_ji.
inline std::vector<double> brute_clustering(const Graph& g) {
  const NodeId n = g.node_count();
  std::vector<std::vector<int>> a(n, std::vector<int>(n, 0));
  for (const Edge& e : g.edges()) a[e.source][e.target] = 1;
  std::vector<double> c(n, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    double walks = 0.0;
    int out = 0, in = 0, recip = 0;
    for (NodeId j = 0; j < n; ++j) {
      out += a[i][j];
      in += a[j][i];
      recip += a[i][j] * a[j][i];
      for (NodeId h = 0; h < n; ++h) {
        walks += (a[i][j] + a[j][i]) * (a[j][h] + a[h][j]) * (a[h][i] + a[i][h]);
      }
    }
    const double t = walks / 2.0;
    const double tot = out + in;
    const double denom = 2.0 * tot * (tot - 1.0) - 2.0 * recip;
    c[i] = denom > 0.0 ? t / denom : 0.0;
  }
  return c;
}

}  // namespace nie::test
