#include <gtest/gtest.h>

#include <map>

#include "fixtures.hpp"
#include "nie/errors.hpp"
#include "nie/features.hpp"

namespace nie {
namespace {

std::map<NodeId, double> as_map(const FActiveMap& m) {
  std::map<NodeId, double> out;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) out[m.nodes[i]] = m.probability[i];
  return out;
}

TEST(NeighborhoodFeature, SpecExamples) {
  const Graph g(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}});
  const std::vector<NodeId> s{0, 1};
  EXPECT_EQ(neighborhood_feature(g, s), 2);
  const Graph isolated(3, {{0, 1, 1.0}});
  const std::vector<NodeId> lone{2};
  EXPECT_EQ(neighborhood_feature(isolated, lone), 0);
  const Graph star(5, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}, {0, 4, 1.0}});
  const std::vector<NodeId> center{0};
  EXPECT_EQ(neighborhood_feature(star, center), 4);
  EXPECT_THROW(neighborhood_feature(g, std::vector<NodeId>{}), InvalidParameter);
}

TEST(LocationAndStructure, SpecExamples) {
  const NodeStats path = compute_node_stats(test::path3());
  EXPECT_DOUBLE_EQ(location_feature(path, std::vector<NodeId>{0, 1}), 5.0 / 3.0);
  EXPECT_EQ(location_feature(path, std::vector<NodeId>{2}), 0.0);
  EXPECT_EQ(location_feature(path, std::vector<NodeId>{0}), path.closeness[0]);

  const NodeStats cycle = compute_node_stats(test::cycle3());
  EXPECT_DOUBLE_EQ(structure_feature(cycle, std::vector<NodeId>{0, 1, 2}), 0.75);
  EXPECT_EQ(structure_feature(path, std::vector<NodeId>{0, 2}), 0.0);
  EXPECT_EQ(structure_feature(cycle, std::vector<NodeId>{1}), cycle.clustering[1]);
  EXPECT_THROW(location_feature(path, std::vector<NodeId>{9}), InvalidInput);
}

TEST(FActiveProbabilities, HandTracedFixtures) {
  const std::vector<NodeId> zero{0};
  const auto coin = as_map(f_active_probabilities(test::coin_graph(), zero, 2));
  EXPECT_EQ(coin.size(), 2u);
  EXPECT_NEAR(coin.at(1), 1.0, 1e-12);
  EXPECT_NEAR(coin.at(2), 0.5, 1e-12);

  const auto ones = as_map(f_active_probabilities(test::path3(), zero, 2));
  EXPECT_NEAR(ones.at(1), 1.0, 1e-12);
  EXPECT_NEAR(ones.at(2), 1.0, 1e-12);

  const auto weighted = as_map(f_active_probabilities(test::path3(0.4, 0.6), zero, 2));
  EXPECT_NEAR(weighted.at(1), 0.4, 1e-12);
  EXPECT_NEAR(weighted.at(2), 0.24, 1e-12);
}

TEST(FActiveProbabilities, ExcludesSeedsAndRespectsRadius) {
  const std::vector<NodeId> zero{0};
  const FActiveMap m = f_active_probabilities(test::path3(), zero, 1);
  EXPECT_EQ(m.nodes, (std::vector<NodeId>{1}));
  EXPECT_EQ(m.distance, (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(m.h_radius, 1u);
  EXPECT_THROW(f_active_probabilities(test::path3(), zero, 0), InvalidParameter);
  EXPECT_THROW(f_active_probabilities(test::path3(), std::vector<NodeId>{}, 2), InvalidParameter);
}

TEST(FActiveProbabilities, LiteralLayerRuleOnGeneralGraph) {
  // Node 3 sits in layer 2 with parents 1 (layer 1) and 2 (layer 1), and a
  // same-layer in-edge from 4 that must not feed its product.
  const Graph g(5, {{0, 1, 0.5}, {0, 2, 0.25}, {0, 4, 1.0}, {1, 3, 0.5}, {2, 3, 0.5}, {4, 1, 0.5}});
  const auto m = as_map(f_active_probabilities(g, std::vector<NodeId>{0}, 3));
  const double pc1 = (0.5 + 0.5) / 2;
  EXPECT_NEAR(m.at(1), pc1, 1e-12);
  EXPECT_NEAR(m.at(2), 0.25, 1e-12);
  EXPECT_NEAR(m.at(4), 1.0, 1e-12);
  EXPECT_NEAR(m.at(3), 0.5 * (1 - (1 - pc1) * (1 - 0.25)), 1e-12);
}

TEST(FActiveProbabilities, ValuesInUnitInterval) {
  Rng rng(4);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Graph g = test::random_graph(30, 90, seed);
    const auto seeds = test::random_subset(g.node_count(), 1 + rng.below(4), rng);
    const FActiveMap m = f_active_probabilities(g, seeds, 1 + static_cast<std::uint32_t>(rng.below(4)));
    for (double p : m.probability) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
}

TEST(FActiveProbabilities, ExactOnTrees) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const NodeId n = 2 + static_cast<NodeId>(seed % 7);
    const Graph g = test::random_tree(n, seed);
    const auto edges = g.edges();
    // Exact marginals by enumerating every live-edge world.
    std::vector<double> exact(n, 0.0);
    for (std::uint64_t mask = 0; mask < (1ULL << edges.size()); ++mask) {
      double w = 1.0;
      std::vector<bool> on(n, false);
      on[0] = true;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        w *= ((mask >> e) & 1U) ? edges[e].probability : 1.0 - edges[e].probability;
      }
      // Tree edges are parent < child, so one pass in id order suffices.
      std::vector<std::size_t> order(edges.size());
      for (std::size_t e = 0; e < edges.size(); ++e) order[e] = e;
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return edges[a].target < edges[b].target; });
      for (std::size_t e : order) {
        if (((mask >> e) & 1U) && on[edges[e].source]) on[edges[e].target] = true;
      }
      for (NodeId v = 1; v < n; ++v) exact[v] += on[v] ? w : 0.0;
    }
    const auto m = as_map(f_active_probabilities(g, std::vector<NodeId>{0}, n));
    ASSERT_EQ(m.size(), n - 1);
    for (NodeId v = 1; v < n; ++v) EXPECT_NEAR(m.at(v), exact[v], 1e-9) << "seed " << seed << " node " << v;
  }
}

TEST(InterRelationship, SpecExamples) {
  const Graph coin = test::coin_graph();
  EXPECT_NEAR(inter_relationship(coin, Instance::make(coin, {0}, {1}), 2), 1.0, 1e-12);
  EXPECT_EQ(inter_relationship(coin, Instance::make(coin, {0}, {}), 2), 0.0);

  const Graph g = test::random_graph(20, 50, 3);
  const FActiveMap m = f_active_probabilities(g, std::vector<NodeId>{0}, 2);
  double total = 0.0;
  for (double p : m.probability) total += p;
  EXPECT_NEAR(inter_relationship(g, Instance::make(g, {0}, m.nodes), 2), total, 1e-12);
}

TEST(InterRelationship, MatchesAllPairsJudgment) {
  Rng rng(9);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Graph g = test::random_graph(static_cast<NodeId>(5 + rng.below(26)), 10 + rng.below(80), seed);
    const auto d = test::all_pairs(g);
    const auto f = test::random_subset(g.node_count(), 1 + rng.below(3), rng);
    const auto t = test::random_subset(g.node_count(), rng.below(5), rng, f);
    const auto h = 1 + static_cast<std::uint32_t>(rng.below(4));
    const FActiveMap m = f_active_probabilities(g, f, h);
    // S_f^H straight from all-pairs distances.
    std::vector<NodeId> members;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      const auto df = test::set_distance(d, f, v);
      if (df >= 1 && df <= h) members.push_back(v);
    }
    std::vector<NodeId> got = m.nodes;
    std::sort(got.begin(), got.end());
    ASSERT_EQ(got, members);
    const auto probs = as_map(m);
    double expected = 0.0;
    for (NodeId v : members) {
      if (test::set_distance(d, t, v) < test::set_distance(d, f, v)) expected += probs.at(v);
    }
    EXPECT_NEAR(inter_relationship(g, Instance::make(g, f, t), h), expected, 1e-12);
  }
}

TEST(InterRelationship, MonotoneInTrueSeedsAndBounded) {
  Rng rng(10);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Graph g = test::random_graph(25, 70, seed);
    const auto f = test::random_subset(g.node_count(), 2, rng);
    std::vector<NodeId> t;
    double last = 0.0;
    const FActiveMap m = f_active_probabilities(g, f, 2);
    double cap = 0.0;
    for (double p : m.probability) cap += p;
    for (NodeId v : test::random_subset(g.node_count(), 6, rng, f)) {
      t.push_back(v);
      const double p = inter_relationship(g, Instance::make(g, f, t), 2);
      EXPECT_GE(p, last);
      EXPECT_LE(p, cap + 1e-12);
      EXPECT_LE(cap, static_cast<double>(m.nodes.size()) + 1e-12);
      last = p;
    }
  }
}

TEST(Featurize, CoinGraphComposition) {
  const Graph g = test::coin_graph();
  const NodeStats stats = compute_node_stats(g);
  const FeatureVector fv = featurize(g, stats, Instance::make(g, {0}, {1}), 2);
  EXPECT_EQ(fv.d_f, 2.0);
  EXPECT_EQ(fv.d_t, 1.0);
  EXPECT_NEAR(fv.p, 1.0, 1e-12);
  EXPECT_EQ(fv.b_f, stats.closeness[0]);
  EXPECT_EQ(fv.c_f, stats.clustering[0]);
  EXPECT_EQ(fv.b_t, stats.closeness[1]);
  EXPECT_EQ(fv.c_t, stats.clustering[1]);
}

TEST(Featurize, EmptyTrueSetZeroesTail) {
  const Graph g = test::random_graph(15, 40, 1);
  const NodeStats stats = compute_node_stats(g);
  const auto a = featurize(g, stats, Instance::make(g, {0, 1}, {}), 2).to_array();
  for (std::size_t i = 3; i < kFeatureCount; ++i) EXPECT_EQ(a[i], 0.0);
}

TEST(Featurize, RelabelingInvariance) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Graph g = test::random_graph(14, 40, seed);
    std::vector<NodeId> perm(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) perm[v] = v;
    Rng rng(seed + 50);
    shuffle(std::span<NodeId>(perm), rng);
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) edges.push_back({perm[e.source], perm[e.target], e.probability});
    const Graph h(g.node_count(), std::move(edges));
    const auto f = test::random_subset(g.node_count(), 2, rng);
    const auto t = test::random_subset(g.node_count(), 3, rng, f);
    std::vector<NodeId> pf, pt;
    for (NodeId v : f) pf.push_back(perm[v]);
    for (NodeId v : t) pt.push_back(perm[v]);
    const auto a = featurize(g, compute_node_stats(g), Instance::make(g, f, t), 2).to_array();
    const auto b = featurize(h, compute_node_stats(h), Instance::make(h, pf, pt), 2).to_array();
    for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_NEAR(a[i], b[i], 1e-12) << i;
  }
}

TEST(Featurizer, ReuseMatchesOneShot) {
  const Graph g = test::random_graph(40, 120, 6);
  const NodeStats stats = compute_node_stats(g);
  Featurizer fz(g, stats, 2);
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto f = test::random_subset(g.node_count(), 1 + rng.below(3), rng);
    const auto t = test::random_subset(g.node_count(), rng.below(4), rng, f);
    const Instance inst = Instance::make(g, f, t);
    EXPECT_EQ(fz(inst), featurize(g, stats, inst, 2));
    fz.bind_false_seeds(f);
    EXPECT_EQ(fz.with_true_seeds(t), featurize(g, stats, inst, 2));
  }
}

TEST(FeatureVector, ArrayRoundTrip) {
  const FeatureVector fv{1, 2, 3, 4, 5, 6, 7};
  const auto a = fv.to_array();
  EXPECT_EQ(FeatureVector::from_array(a), fv);
}

}  // namespace
}  // namespace nie
