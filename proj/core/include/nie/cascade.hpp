#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nie/graph.hpp"
#include "nie/rng.hpp"

namespace nie {

/// A false-and-true information pair over a graph. Seed lists are kept
/// sorted and duplicate-free.
struct Instance {
  std::vector<NodeId> false_seeds;
  std::vector<NodeId> true_seeds;

  /// Normalizes and checks the invariants: false seeds nonempty, ids valid,
  /// sets disjoint. Throws InvalidInput.
  static Instance make(const Graph& graph, std::vector<NodeId> false_seeds,
                       std::vector<NodeId> true_seeds);

  friend bool operator==(const Instance&, const Instance&) = default;
};

enum class NodeState : std::uint8_t { kInactive = 0, kFalse = 1, kTrue = 2 };

struct SimOutcome {
  std::uint32_t false_active = 0;
  /// Y: nodes that are not F-active at the end.
  std::uint32_t not_false = 0;
  std::vector<NodeState> states;  ///< filled only when requested
};

/// Scratch buffers for repeated simulation on one graph. Not thread-safe;
/// use one per thread.
class Simulator {
 public:
  explicit Simulator(const Graph& graph);

  /// Runs the two-cascade process in synchronous rounds against a fixed
  /// live-edge world. Nodes activated in round t attempt their inactive
  /// out-neighbours in round t + 1; an F and a T success on the same node in
  /// the same round resolve to F.
  SimOutcome run(const Instance& instance, const LiveEdgeWorld& world, bool record_states = false);

  /// Same as run(...).not_false, without the outcome allocation.
  std::uint32_t count_not_false(std::span<const NodeId> false_seeds,
                                std::span<const NodeId> true_seeds, const LiveEdgeWorld& world);

 private:
  const Graph* graph_;
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> stamp_;
  std::vector<NodeState> state_;
  std::vector<NodeId> frontier_false_;
  std::vector<NodeId> frontier_true_;
  std::vector<NodeId> next_false_;
  std::vector<NodeId> next_true_;

  void reset();
  bool inactive(NodeId v) const noexcept { return stamp_[v] != epoch_; }
  void set(NodeId v, NodeState s) noexcept {
    stamp_[v] = epoch_;
    state_[v] = s;
  }
};

SimOutcome simulate_once(const Graph& graph, const Instance& instance, const LiveEdgeWorld& world);

/// World of replication i under a master seed.
inline LiveEdgeWorld replication_world(std::uint64_t master_seed, std::uint64_t replication) {
  return LiveEdgeWorld(derive_seed(master_seed, replication));
}

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t replications = 0;
  std::uint64_t master_seed = 0;
};

/// Monte Carlo estimate of y(S_t | S_f), the expected number of nodes that
/// end up not F-active. Throws InvalidParameter when r < 1.
Estimate estimate_y(const Graph& graph, const Instance& instance, std::int64_t r,
                    std::uint64_t master_seed);

/// Estimate of f(S_t | S_f) = y(S_t | S_f) - y(empty | S_f). Both terms of
/// replication i run in the same world, so an empty S_t gives exactly 0.
Estimate estimate_blocked(const Graph& graph, const Instance& instance, std::int64_t r,
                          std::uint64_t master_seed);

/// Sum of Y over replications 0..r-1, as an exact integer. Differences of
/// two totals divided by r reproduce estimate_blocked's mean bit-for-bit.
std::int64_t total_not_false(const Graph& graph, std::span<const NodeId> false_seeds,
                             std::span<const NodeId> true_seeds, std::int64_t r,
                             std::uint64_t master_seed);

inline constexpr std::size_t kDefaultOracleEdgeLimit = 20;

/// Exact f(S_t | S_f) by enumerating all 2^m live-edge worlds. Throws
/// OracleRefusal when m exceeds max_edges.
double exact_blocked(const Graph& graph, const Instance& instance,
                     std::size_t max_edges = kDefaultOracleEdgeLimit);

}  // namespace nie
