#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace nie {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Edge {
  NodeId source = 0;
  NodeId target = 0;
  double probability = 1.0;
};

/// Immutable directed graph in compressed sparse row form, indexed in both
/// directions. Out-edges are sorted by (source, target) and an edge's id is
/// its position in that order.
class Graph {
 public:
  /// Validates and indexes the edge list. Throws InvalidInput on an empty
  /// graph, out-of-range ids, self-loops, duplicate edges, or probabilities
  /// outside (0, 1].
  Graph(NodeId node_count, std::vector<Edge> edges, bool explicit_probabilities = true,
        std::vector<std::int64_t> labels = {});

  NodeId node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return targets_.size(); }

  std::span<const NodeId> successors(NodeId u) const noexcept {
    return {targets_.data() + out_offsets_[u], targets_.data() + out_offsets_[u + 1]};
  }
  std::span<const double> out_probabilities(NodeId u) const noexcept {
    return {out_probs_.data() + out_offsets_[u], out_probs_.data() + out_offsets_[u + 1]};
  }
  /// Id of u's first out-edge; successors(u)[i] is edge first_out_edge(u) + i.
  EdgeId first_out_edge(NodeId u) const noexcept { return out_offsets_[u]; }

  std::span<const NodeId> predecessors(NodeId v) const noexcept {
    return {sources_.data() + in_offsets_[v], sources_.data() + in_offsets_[v + 1]};
  }
  /// Probabilities of v's in-edges, aligned with predecessors(v).
  std::span<const double> in_probabilities(NodeId v) const noexcept {
    return {in_probs_.data() + in_offsets_[v], in_probs_.data() + in_offsets_[v + 1]};
  }

  std::uint32_t out_degree(NodeId u) const noexcept { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::uint32_t in_degree(NodeId v) const noexcept { return in_offsets_[v + 1] - in_offsets_[v]; }

  std::optional<double> probability(NodeId u, NodeId v) const;
  std::optional<EdgeId> find_edge(NodeId u, NodeId v) const;

  /// Edges in canonical (id) order.
  std::vector<Edge> edges() const;

  /// False when the source file carried no probability column; such graphs
  /// hold placeholder probabilities of 1 until assign_degree_probabilities.
  bool explicit_probabilities() const noexcept { return explicit_probabilities_; }

  /// Original file label of each node. Identity when built directly.
  std::int64_t label(NodeId v) const noexcept { return labels_[v]; }
  std::optional<NodeId> node_with_label(std::int64_t label) const;

  /// Hex content hash over node count, labels, edges, and probabilities.
  const std::string& fingerprint() const noexcept { return fingerprint_; }

  bool valid_node(NodeId v) const noexcept { return v < node_count_; }

 private:
  NodeId node_count_;
  bool explicit_probabilities_;
  std::vector<EdgeId> out_offsets_;
  std::vector<NodeId> targets_;
  std::vector<double> out_probs_;
  std::vector<EdgeId> in_offsets_;
  std::vector<NodeId> sources_;
  std::vector<double> in_probs_;
  std::vector<std::int64_t> labels_;
  std::unordered_map<std::int64_t, NodeId> label_index_;
  std::string fingerprint_;
};

enum class HeaderMode { kAuto, kNone };

struct LoadResult {
  Graph graph;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

/// Parses a SNAP-style edge list: "u v" or "u v p" per line, '#' comments.
/// Labels are compacted to [0, n) in ascending label order. The first
/// occurrence of a duplicate edge wins; self-loops are dropped. In kAuto mode
/// a first data line that does not parse as integers is skipped as a header.
LoadResult load_edge_list(std::istream& in, HeaderMode header_mode = HeaderMode::kAuto);
LoadResult load_edge_list_file(const std::filesystem::path& path,
                               HeaderMode header_mode = HeaderMode::kAuto);

void write_edge_list(std::ostream& out, const Graph& graph);

/// Returns a copy whose edge (u, v) has probability 1 / in_degree(v).
Graph assign_degree_probabilities(const Graph& graph);

struct NodeStats {
  std::vector<double> closeness;
  std::vector<double> clustering;
  std::vector<std::uint32_t> in_degree;
  std::vector<std::uint32_t> out_degree;
};

struct ClosenessMode {
  enum class Kind { kExact, kSampled } kind = Kind::kExact;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;

  static ClosenessMode exact() { return {}; }
  static ClosenessMode sampled(std::int64_t k, std::uint64_t seed = 0) {
    return {Kind::kSampled, k, seed};
  }
  /// Exact up to `threshold` nodes, sampled with `k` sources above it.
  static ClosenessMode automatic(NodeId node_count, NodeId threshold = 50'000,
                                 std::int64_t k = 256, std::uint64_t seed = 0) {
    return node_count <= threshold ? exact() : sampled(k, seed);
  }
};

/// Closeness b_i = L / sum of hop distances to the L nodes reachable from i
/// (0 when L = 0). Clustering follows the directed-triangle formula
/// T / (2 d_tot (d_tot - 1) - 2 d_recip), 0 when the denominator is 0.
NodeStats compute_node_stats(const Graph& graph, ClosenessMode mode = ClosenessMode::exact());

/// Reusable truncated multi-source BFS over out-edges. Distances of nodes
/// not reached within the depth limit are reported as absent.
class HopDistances {
 public:
  explicit HopDistances(NodeId node_count);

  /// Throws InvalidParameter on empty sources, InvalidInput on bad ids.
  void run(const Graph& graph, std::span<const NodeId> sources, std::uint32_t depth_limit);

  std::optional<std::uint32_t> distance(NodeId v) const noexcept {
    if (stamp_[v] != epoch_) return std::nullopt;
    return dist_[v];
  }
  bool reached(NodeId v) const noexcept { return stamp_[v] == epoch_; }
  /// Reached nodes in nondecreasing distance order.
  std::span<const NodeId> visited() const noexcept { return order_; }

 private:
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint32_t> dist_;
  std::vector<NodeId> order_;
};

/// d(S, v) = min over u in S of the directed hop distance u -> v, for every v
/// with d(S, v) <= depth_limit. Sources map to 0.
std::unordered_map<NodeId, std::uint32_t> multi_source_bfs(const Graph& graph,
                                                           std::span<const NodeId> sources,
                                                           std::uint32_t depth_limit);

inline constexpr int kStatsCacheVersion = 1;

/// JSON sidecar keyed by the graph fingerprint.
void save_stats_cache(const std::filesystem::path& path, const NodeStats& stats,
                      const std::string& fingerprint);
/// Throws ParseError on a corrupt or truncated file, VersionMismatch on an
/// unknown version, and FingerprintMismatch when keyed to another graph.
NodeStats load_stats_cache(const std::filesystem::path& path, const std::string& fingerprint);

}  // namespace nie
