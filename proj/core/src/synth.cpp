#include "nie/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "nie/errors.hpp"
#include "nie/rng.hpp"

namespace nie {

Graph power_law_graph(const PowerLawSpec& spec) {
  const std::uint64_t n = spec.nodes;
  if (n < 2) throw InvalidParameter("power-law graph needs at least 2 nodes");
  if (spec.edges < n - 1 || spec.edges > n * (n - 1)) {
    throw InvalidParameter("edge count " + std::to_string(spec.edges) + " outside [" +
                           std::to_string(n - 1) + ", " + std::to_string(n * (n - 1)) + "]");
  }
  if (!(spec.exponent > 1.0)) throw InvalidParameter("exponent must exceed 1");

  Rng rng(spec.seed);
  // Node order is shuffled so that hubs are not simply the smallest ids.
  std::vector<NodeId> perm(n);
  for (NodeId v = 0; v < n; ++v) perm[v] = v;
  shuffle(std::span<NodeId>(perm), rng);

  std::vector<Edge> edges;
  edges.reserve(spec.edges);
  std::unordered_set<std::uint64_t> seen;
  auto add = [&](NodeId u, NodeId v) {
    if (u == v) return false;
    if (!seen.insert((std::uint64_t{u} << 32) | v).second) return false;
    edges.push_back(Edge{u, v, 1.0});
    return true;
  };

  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    total += std::pow(static_cast<double>(i + 1), -1.0 / (spec.exponent - 1.0));
    cumulative[i] = total;
  }
  // Weighted draw among the first `limit` weight ranks.
  auto weighted = [&](std::uint64_t limit) {
    const double x = rng.uniform() * cumulative[limit - 1];
    auto it = std::upper_bound(cumulative.begin(), cumulative.begin() + static_cast<std::ptrdiff_t>(limit), x);
    const auto rank = std::min<std::uint64_t>(static_cast<std::uint64_t>(it - cumulative.begin()), limit - 1);
    return perm[rank];
  };

  // Rank i attaches to a weighted earlier rank; direction by coin.
  for (std::uint64_t i = 1; i < n; ++i) {
    const NodeId parent = weighted(i);
    const NodeId child = perm[i];
    if (rng.below(2) == 0) add(parent, child);
    else add(child, parent);
  }
  while (edges.size() < spec.edges) add(weighted(n), weighted(n));

  return assign_degree_probabilities(Graph(spec.nodes, std::move(edges), false));
}

}  // namespace nie
