#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "nie/cascade.hpp"
#include "nie/graph.hpp"

namespace nie {

inline constexpr std::size_t kFeatureCount = 7;

/// Input of the neural estimator. Order is fixed: d_f, b_f, c_f, d_t, b_t,
/// c_t, p.
struct FeatureVector {
  double d_f = 0.0;
  double b_f = 0.0;
  double c_f = 0.0;
  double d_t = 0.0;
  double b_t = 0.0;
  double c_t = 0.0;
  double p = 0.0;

  std::array<double, kFeatureCount> to_array() const { return {d_f, b_f, c_f, d_t, b_t, c_t, p}; }
  static FeatureVector from_array(std::span<const double, kFeatureCount> a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
  }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Approximate F-activation probabilities on S_f^H, the nodes at hop
/// distance 1..H from the false seeds. Seeds themselves are not members.
struct FActiveMap {
  std::uint32_t h_radius = 0;
  std::vector<NodeId> nodes;            ///< members of S_f^H in BFS order
  std::vector<std::uint32_t> distance;  ///< d(S_f, node), aligned with nodes
  std::vector<double> probability;      ///< aligned with nodes
};

/// |union of out-neighbour sets of s|. Throws InvalidParameter on empty s.
std::int64_t neighborhood_feature(const Graph& graph, std::span<const NodeId> s);
/// Sum of closeness over s.
double location_feature(const NodeStats& stats, std::span<const NodeId> s);
/// Sum of clustering coefficients over s.
double structure_feature(const NodeStats& stats, std::span<const NodeId> s);

/// Layer-wise propagation: a node at distance 1 gets its propagation
/// coefficient pc (mean in-edge probability); a node at distance h >= 2 gets
/// pc * (1 - prod over parents at distance h-1 of (1 - Pr[parent])).
/// Throws InvalidParameter when h < 1.
FActiveMap f_active_probabilities(const Graph& graph, std::span<const NodeId> false_seeds,
                                  std::uint32_t h);

/// p(S_f, S_t): sum over S_f^H of Pr[s_i is F-active] weighted by the
/// judgment d(S_t, s_i) < d(S_f, s_i).
double inter_relationship(const Graph& graph, const Instance& instance, std::uint32_t h);

/// Holds per-thread scratch so repeated featurization avoids allocation.
/// Not thread-safe.
class Featurizer {
 public:
  Featurizer(const Graph& graph, const NodeStats& stats, std::uint32_t h);

  FeatureVector operator()(const Instance& instance);

  /// Pre-computes the S_f-only part (d_f, b_f, c_f and S_f^H); subsequent
  /// calls with the same false seeds only redo the S_t-dependent part.
  /// Rebinding the currently bound seeds is a no-op.
  void bind_false_seeds(std::span<const NodeId> false_seeds);
  FeatureVector with_true_seeds(std::span<const NodeId> true_seeds);

  std::uint32_t h_radius() const noexcept { return h_; }
  const FActiveMap& bound_map() const noexcept { return map_; }

 private:
  const Graph* graph_;
  const NodeStats* stats_;
  std::uint32_t h_;
  HopDistances false_bfs_;
  HopDistances true_bfs_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t mark_epoch_ = 0;
  std::vector<double> prob_scratch_;

  std::vector<NodeId> bound_false_;
  FActiveMap map_;
  double d_f_ = 0.0;
  double b_f_ = 0.0;
  double c_f_ = 0.0;

  std::int64_t count_out_neighbors(std::span<const NodeId> s);
};

/// One-shot featurization. Empty S_t gives zeros in the last four slots.
FeatureVector featurize(const Graph& graph, const NodeStats& stats, const Instance& instance,
                        std::uint32_t h);

}  // namespace nie
