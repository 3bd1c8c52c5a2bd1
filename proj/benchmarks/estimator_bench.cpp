// Cost of one blocked-influence evaluation: NIE surrogate against Monte Carlo.

#include <benchmark/benchmark.h>

#include "nie/datagen.hpp"
#include "nie/optimizer.hpp"
#include "nie/synth.hpp"

namespace {

struct Setup {
  nie::Graph graph;
  nie::NodeStats stats;
  nie::MlpModel model;
  nie::Instance instance;

  explicit Setup(const nie::PowerLawSpec& spec)
      : graph(nie::power_law_graph(spec)), stats(nie::compute_node_stats(graph)) {
    // Untrained weights cost the same to evaluate as trained ones.
    model = nie::MlpModel::initialized({7, 128, 128, 1}, 1);
    model.graph_fingerprint = graph.fingerprint();
    nie::Rng rng(spec.seed + 1);
    instance = nie::sample_instance(graph, nie::SamplerConfig{}, rng);
    while (instance.true_seeds.empty()) instance = nie::sample_instance(graph, nie::SamplerConfig{}, rng);
  }
};

const Setup& desk() {
  static const Setup s(nie::PowerLawSpec{});
  return s;
}

const Setup& dense() {
  static const Setup s(nie::PowerLawSpec{1005, 25'571, 2.1, 8});
  return s;
}

const Setup& pick(int which) { return which == 0 ? desk() : dense(); }

void BM_NieScore(benchmark::State& state) {
  const Setup& s = pick(static_cast<int>(state.range(0)));
  nie::NieEstimator est(s.graph, s.stats, s.model);
  for (auto _ : state) {
    benchmark::DoNotOptimize(est.score(s.instance.false_seeds, s.instance.true_seeds));
  }
}
BENCHMARK(BM_NieScore)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_NieFeaturize(benchmark::State& state) {
  const Setup& s = pick(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nie::featurize(s.graph, s.stats, s.instance, 2));
  }
}
BENCHMARK(BM_NieFeaturize)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_McsEstimate(benchmark::State& state) {
  const Setup& s = pick(static_cast<int>(state.range(0)));
  const std::int64_t r = state.range(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nie::estimate_blocked(s.graph, s.instance, r, 3));
  }
  state.counters["replications"] = static_cast<double>(r);
}
BENCHMARK(BM_McsEstimate)->Args({0, 1000})->Args({0, 10'000})->Args({1, 10'000})->Unit(benchmark::kMillisecond);

void BM_NodeStats(benchmark::State& state) {
  const Setup& s = pick(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nie::compute_node_stats(s.graph));
}
BENCHMARK(BM_NodeStats)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
