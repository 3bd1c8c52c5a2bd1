#include "nie/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "nie/errors.hpp"
#include "nie/parallel.hpp"

namespace nie {

Instance Instance::make(const Graph& graph, std::vector<NodeId> false_seeds,
                        std::vector<NodeId> true_seeds) {
  auto normalize = [&](std::vector<NodeId>& seeds, const char* which) {
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    for (NodeId v : seeds) {
      if (!graph.valid_node(v)) {
        throw InvalidInput(std::string(which) + " seed " + std::to_string(v) + " is not a node");
      }
    }
  };
  normalize(false_seeds, "false");
  normalize(true_seeds, "true");
  if (false_seeds.empty()) throw InvalidInput("instance needs at least one false seed");
  std::vector<NodeId> overlap;
  std::set_intersection(false_seeds.begin(), false_seeds.end(), true_seeds.begin(),
                        true_seeds.end(), std::back_inserter(overlap));
  if (!overlap.empty()) {
    throw InvalidInput("node " + std::to_string(overlap.front()) + " is both a false and a true seed");
  }
  return Instance{std::move(false_seeds), std::move(true_seeds)};
}

Simulator::Simulator(const Graph& graph)
    : graph_(&graph), stamp_(graph.node_count(), 0), state_(graph.node_count(), NodeState::kInactive) {}

void Simulator::reset() {
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
}

std::uint32_t Simulator::count_not_false(std::span<const NodeId> false_seeds,
                                         std::span<const NodeId> true_seeds,
                                         const LiveEdgeWorld& world) {
  const Graph& g = *graph_;
  reset();
  frontier_false_.clear();
  frontier_true_.clear();
  std::uint32_t false_active = 0;
  for (NodeId v : false_seeds) {
    if (!inactive(v)) continue;
    set(v, NodeState::kFalse);
    frontier_false_.push_back(v);
    ++false_active;
  }
  for (NodeId v : true_seeds) {
    if (!inactive(v)) continue;
    set(v, NodeState::kTrue);
    frontier_true_.push_back(v);
  }

  while (!frontier_false_.empty() || !frontier_true_.empty()) {
    next_false_.clear();
    next_true_.clear();
    // F attempts resolve first: a node claimed by F this round is no longer
    // inactive when the T attempts of the same round are examined.
    for (NodeId u : frontier_false_) {
      const auto succ = g.successors(u);
      const auto prob = g.out_probabilities(u);
      const EdgeId first = g.first_out_edge(u);
      for (std::size_t i = 0; i < succ.size(); ++i) {
        const NodeId w = succ[i];
        if (inactive(w) && world.live(first + i, prob[i])) {
          set(w, NodeState::kFalse);
          next_false_.push_back(w);
          ++false_active;
        }
      }
    }
    for (NodeId u : frontier_true_) {
      const auto succ = g.successors(u);
      const auto prob = g.out_probabilities(u);
      const EdgeId first = g.first_out_edge(u);
      for (std::size_t i = 0; i < succ.size(); ++i) {
        const NodeId w = succ[i];
        if (inactive(w) && world.live(first + i, prob[i])) {
          set(w, NodeState::kTrue);
          next_true_.push_back(w);
        }
      }
    }
    frontier_false_.swap(next_false_);
    frontier_true_.swap(next_true_);
  }
  return g.node_count() - false_active;
}

SimOutcome Simulator::run(const Instance& instance, const LiveEdgeWorld& world, bool record_states) {
  SimOutcome out;
  out.not_false = count_not_false(instance.false_seeds, instance.true_seeds, world);
  out.false_active = graph_->node_count() - out.not_false;
  if (record_states) {
    out.states.resize(graph_->node_count());
    for (NodeId v = 0; v < graph_->node_count(); ++v) {
      out.states[v] = inactive(v) ? NodeState::kInactive : state_[v];
    }
  }
  return out;
}

SimOutcome simulate_once(const Graph& graph, const Instance& instance, const LiveEdgeWorld& world) {
  Simulator sim(graph);
  return sim.run(instance, world, true);
}

namespace {

struct Moments {
  std::int64_t sum = 0;
  // Sum of squares can exceed 64 bits on large graphs at high r.
  uint128 sum_sq = 0;
};

template <typename Sample>
Estimate run_replications(const Graph& graph, std::int64_t r, std::uint64_t master_seed,
                          Sample&& sample) {
  if (r < 1) throw InvalidParameter("replication count must be >= 1, got " + std::to_string(r));
  Moments total;
  std::mutex merge;
  parallel_for(static_cast<std::size_t>(r), [&](std::size_t begin, std::size_t end) {
    Simulator sim(graph);
    Moments local;
    for (std::size_t i = begin; i < end; ++i) {
      const std::int64_t y = sample(sim, replication_world(master_seed, i));
      local.sum += y;
      local.sum_sq += static_cast<uint128>(y * y);
    }
    std::lock_guard lock(merge);
    total.sum += local.sum;
    total.sum_sq += local.sum_sq;
  });

  Estimate est;
  est.replications = r;
  est.master_seed = master_seed;
  est.mean = static_cast<double>(total.sum) / static_cast<double>(r);
  if (r > 1) {
    const long double s = static_cast<long double>(total.sum);
    const long double ss = static_cast<long double>(total.sum_sq);
    const long double rr = static_cast<long double>(r);
    long double var = (ss - s * s / rr) / (rr - 1.0L);
    if (var < 0.0L) var = 0.0L;
    est.std_error = static_cast<double>(std::sqrt(var / rr));
  }
  return est;
}

}  // namespace

Estimate estimate_y(const Graph& graph, const Instance& instance, std::int64_t r,
                    std::uint64_t master_seed) {
  return run_replications(graph, r, master_seed, [&](Simulator& sim, const LiveEdgeWorld& world) {
    return static_cast<std::int64_t>(
        sim.count_not_false(instance.false_seeds, instance.true_seeds, world));
  });
}

Estimate estimate_blocked(const Graph& graph, const Instance& instance, std::int64_t r,
                          std::uint64_t master_seed) {
  if (instance.true_seeds.empty()) {
    if (r < 1) throw InvalidParameter("replication count must be >= 1, got " + std::to_string(r));
    return Estimate{0.0, 0.0, r, master_seed};
  }
  return run_replications(graph, r, master_seed, [&](Simulator& sim, const LiveEdgeWorld& world) {
    const auto with = static_cast<std::int64_t>(
        sim.count_not_false(instance.false_seeds, instance.true_seeds, world));
    const auto without =
        static_cast<std::int64_t>(sim.count_not_false(instance.false_seeds, {}, world));
    return with - without;
  });
}

std::int64_t total_not_false(const Graph& graph, std::span<const NodeId> false_seeds,
                             std::span<const NodeId> true_seeds, std::int64_t r,
                             std::uint64_t master_seed) {
  if (r < 1) throw InvalidParameter("replication count must be >= 1, got " + std::to_string(r));
  std::int64_t total = 0;
  std::mutex merge;
  parallel_for(static_cast<std::size_t>(r), [&](std::size_t begin, std::size_t end) {
    Simulator sim(graph);
    std::int64_t local = 0;
    for (std::size_t i = begin; i < end; ++i) {
      local += sim.count_not_false(false_seeds, true_seeds, replication_world(master_seed, i));
    }
    std::lock_guard lock(merge);
    total += local;
  });
  return total;
}

// ---------------------------------------------------------------------------
// Exact oracle. Deliberately shares no code with Simulator.

namespace {

int count_not_false_in_world(const std::vector<Edge>& edges, const std::vector<bool>& live,
                             NodeId n, const std::vector<NodeId>& false_seeds,
                             const std::vector<NodeId>& true_seeds) {
  // 0 = inactive, 1 = F, 2 = T; `round` is when a node was activated.
  std::vector<int> state(n, 0);
  std::vector<int> round(n, -1);
  for (NodeId v : false_seeds) state[v] = 1, round[v] = 0;
  for (NodeId v : true_seeds) state[v] = 2, round[v] = 0;
  for (int t = 1;; ++t) {
    std::vector<int> claim(n, 0);
    bool changed = false;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (!live[e]) continue;
      const NodeId u = edges[e].source;
      const NodeId v = edges[e].target;
      if (round[u] != t - 1 || state[v] != 0) continue;
      if (state[u] == 1) claim[v] = 1;
      else if (claim[v] == 0) claim[v] = 2;
    }
    for (NodeId v = 0; v < n; ++v) {
      if (claim[v] != 0) {
        state[v] = claim[v];
        round[v] = t;
        changed = true;
      }
    }
    if (!changed) break;
  }
  int not_false = 0;
  for (NodeId v = 0; v < n; ++v) not_false += state[v] != 1;
  return not_false;
}

}  // namespace

double exact_blocked(const Graph& graph, const Instance& instance, std::size_t max_edges) {
  const std::size_t m = graph.edge_count();
  if (m > max_edges || m >= 63) {
    throw OracleRefusal("exact oracle enumerates 2^m worlds and is limited to m <= " +
                        std::to_string(max_edges) + " edges; graph has " + std::to_string(m));
  }
  if (instance.true_seeds.empty()) return 0.0;

  const std::vector<Edge> edges = graph.edges();
  const NodeId n = graph.node_count();
  std::vector<bool> live(m);
  double total = 0.0;
  const std::uint64_t worlds = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < worlds; ++mask) {
    double weight = 1.0;
    for (std::size_t e = 0; e < m; ++e) {
      live[e] = (mask >> e) & 1U;
      weight *= live[e] ? edges[e].probability : 1.0 - edges[e].probability;
    }
    if (weight == 0.0) continue;
    const int with = count_not_false_in_world(edges, live, n, instance.false_seeds, instance.true_seeds);
    const int without = count_not_false_in_world(edges, live, n, instance.false_seeds, {});
    total += weight * static_cast<double>(with - without);
  }
  return total;
}

}  // namespace nie
