#include "nie/features.hpp"

#include <string>

#include "nie/errors.hpp"

namespace nie {
namespace {

void check_radius(std::uint32_t h) {
  if (h < 1) throw InvalidParameter("radius H must be >= 1");
}

void check_ids(std::span<const NodeId> s, std::size_t n) {
  for (NodeId v : s) {
    if (v >= n) throw InvalidInput("node id " + std::to_string(v) + " out of range");
  }
}

void build_f_active_map(const Graph& g, std::span<const NodeId> false_seeds, std::uint32_t h,
                        HopDistances& bfs, std::vector<double>& prob_by_node, FActiveMap& map) {
  check_radius(h);
  bfs.run(g, false_seeds, h);
  map.h_radius = h;
  map.nodes.clear();
  map.distance.clear();
  map.probability.clear();

  // BFS order visits layers in nondecreasing distance, so every parent in
  // layer h-1 is final before any node of layer h is processed.
  for (NodeId v : bfs.visited()) {
    const std::uint32_t dv = *bfs.distance(v);
    if (dv == 0) continue;
    const auto parents = g.predecessors(v);
    const auto in_probs = g.in_probabilities(v);
    double pc = 0.0;
    for (double p : in_probs) pc += p;
    pc /= static_cast<double>(parents.size());

    double pr = pc;
    if (dv >= 2) {
      double none_active = 1.0;
      for (NodeId u : parents) {
        const auto du = bfs.distance(u);
        if (du && *du >= 1 && *du <= dv - 1) none_active *= 1.0 - prob_by_node[u];
      }
      pr = pc * (1.0 - none_active);
    }
    prob_by_node[v] = pr;
    map.nodes.push_back(v);
    map.distance.push_back(dv);
    map.probability.push_back(pr);
  }
}

double judge(const Graph& g, const FActiveMap& map, std::span<const NodeId> true_seeds,
             HopDistances& bfs) {
  if (true_seeds.empty() || map.nodes.empty()) {
    check_ids(true_seeds, g.node_count());
    return 0.0;
  }
  // Only d(S_t, s_i) < d(S_f, s_i) <= H matters, so depth H-1 suffices.
  bfs.run(g, true_seeds, map.h_radius - 1);
  double p = 0.0;
  for (std::size_t i = 0; i < map.nodes.size(); ++i) {
    const auto dt = bfs.distance(map.nodes[i]);
    if (dt && *dt < map.distance[i]) p += map.probability[i];
  }
  return p;
}

double sum_over(const std::vector<double>& values, std::span<const NodeId> s) {
  check_ids(s, values.size());
  double total = 0.0;
  for (NodeId v : s) total += values[v];
  return total;
}

}  // namespace

std::int64_t neighborhood_feature(const Graph& graph, std::span<const NodeId> s) {
  if (s.empty()) throw InvalidParameter("neighborhood feature needs a nonempty seed set");
  check_ids(s, graph.node_count());
  std::vector<bool> seen(graph.node_count(), false);
  std::int64_t count = 0;
  for (NodeId u : s) {
    for (NodeId w : graph.successors(u)) {
      if (!seen[w]) {
        seen[w] = true;
        ++count;
      }
    }
  }
  return count;
}

double location_feature(const NodeStats& stats, std::span<const NodeId> s) {
  return sum_over(stats.closeness, s);
}

double structure_feature(const NodeStats& stats, std::span<const NodeId> s) {
  return sum_over(stats.clustering, s);
}

FActiveMap f_active_probabilities(const Graph& graph, std::span<const NodeId> false_seeds,
                                  std::uint32_t h) {
  check_radius(h);
  HopDistances bfs(graph.node_count());
  std::vector<double> scratch(graph.node_count(), 0.0);
  FActiveMap map;
  build_f_active_map(graph, false_seeds, h, bfs, scratch, map);
  return map;
}

double inter_relationship(const Graph& graph, const Instance& instance, std::uint32_t h) {
  const FActiveMap map = f_active_probabilities(graph, instance.false_seeds, h);
  HopDistances bfs(graph.node_count());
  return judge(graph, map, instance.true_seeds, bfs);
}

// ---------------------------------------------------------------------------

Featurizer::Featurizer(const Graph& graph, const NodeStats& stats, std::uint32_t h)
    : graph_(&graph),
      stats_(&stats),
      h_(h),
      false_bfs_(graph.node_count()),
      true_bfs_(graph.node_count()),
      mark_(graph.node_count(), 0),
      prob_scratch_(graph.node_count(), 0.0) {
  check_radius(h);
  if (stats.closeness.size() != graph.node_count() ||
      stats.clustering.size() != graph.node_count()) {
    throw InvalidInput("node statistics do not match the graph");
  }
}

std::int64_t Featurizer::count_out_neighbors(std::span<const NodeId> s) {
  if (++mark_epoch_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0);
    mark_epoch_ = 1;
  }
  std::int64_t count = 0;
  for (NodeId u : s) {
    for (NodeId w : graph_->successors(u)) {
      if (mark_[w] != mark_epoch_) {
        mark_[w] = mark_epoch_;
        ++count;
      }
    }
  }
  return count;
}

void Featurizer::bind_false_seeds(std::span<const NodeId> false_seeds) {
  if (false_seeds.empty()) throw InvalidParameter("false seed set is empty");
  check_ids(false_seeds, graph_->node_count());
  if (std::equal(bound_false_.begin(), bound_false_.end(), false_seeds.begin(), false_seeds.end())) return;
  bound_false_.assign(false_seeds.begin(), false_seeds.end());
  d_f_ = static_cast<double>(count_out_neighbors(false_seeds));
  b_f_ = location_feature(*stats_, false_seeds);
  c_f_ = structure_feature(*stats_, false_seeds);
  build_f_active_map(*graph_, false_seeds, h_, false_bfs_, prob_scratch_, map_);
}

FeatureVector Featurizer::with_true_seeds(std::span<const NodeId> true_seeds) {
  if (bound_false_.empty()) throw InvalidParameter("no false seeds bound");
  FeatureVector fv;
  fv.d_f = d_f_;
  fv.b_f = b_f_;
  fv.c_f = c_f_;
  if (!true_seeds.empty()) {
    check_ids(true_seeds, graph_->node_count());
    fv.d_t = static_cast<double>(count_out_neighbors(true_seeds));
    fv.b_t = location_feature(*stats_, true_seeds);
    fv.c_t = structure_feature(*stats_, true_seeds);
    fv.p = judge(*graph_, map_, true_seeds, true_bfs_);
  }
  return fv;
}

FeatureVector Featurizer::operator()(const Instance& instance) {
  bind_false_seeds(instance.false_seeds);
  return with_true_seeds(instance.true_seeds);
}

FeatureVector featurize(const Graph& graph, const NodeStats& stats, const Instance& instance,
                        std::uint32_t h) {
  Featurizer f(graph, stats, h);
  return f(instance);
}

}  // namespace nie
