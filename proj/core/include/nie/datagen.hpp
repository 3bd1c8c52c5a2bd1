#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nie/cascade.hpp"
#include "nie/features.hpp"
#include "nie/graph.hpp"
#include "nie/mlp.hpp"
#include "nie/rng.hpp"

namespace nie {

struct SamplerConfig {
  double rho = 0.10;          ///< fraction of nodes in the high-impact pool
  double pareto_shape = 9.0;  ///< seed-set size ~ round(Pareto(shape, scale))
  double pareto_scale = 10.0;
  std::int64_t k_cap = 1'000'000;

  /// Throws InvalidParameter unless rho in (0,1], shape > 1, scale >= 1,
  /// k_cap >= 1.
  void validate() const;
};

/// The ceil(rho * n) nodes with the largest out-degree, ties by ascending id.
std::vector<NodeId> high_impact_pool(const Graph& graph, double rho);

/// One draw of round(scale / U^(1/shape)), U uniform in (0, 1].
std::int64_t draw_pareto_size(const SamplerConfig& config, Rng& rng);

/// S_f: a uniform sample without replacement from the high-impact pool, of
/// size min(k_cap, Pareto draw) clamped to the pool size.
std::vector<NodeId> sample_false_seeds(const Graph& graph, const SamplerConfig& config, Rng& rng);

/// S_f as above, then k_t uniform in [0, |S_f|] and S_t uniform without
/// replacement from V \ S_f.
Instance sample_instance(const Graph& graph, const SamplerConfig& config, Rng& rng);

struct DatasetRecord {
  Instance instance;
  double label = 0.0;
  std::optional<FeatureVector> features;
};

struct Dataset {
  std::string graph_fingerprint;
  std::int64_t label_replications = 0;
  std::uint32_t h_radius = 2;
  std::vector<DatasetRecord> records;
  /// Seed-set size draws that exceeded the pool and were clamped. Not
  /// persisted.
  std::size_t clamped_draws = 0;
};

struct GenerateOptions {
  std::int64_t count = 1;
  std::int64_t label_replications = 1000;
  SamplerConfig sampler;
  std::uint64_t master_seed = 0;
  std::uint32_t h_radius = 2;
  /// Attach feature vectors to records; requires stats.
  const NodeStats* stats = nullptr;
};

/// Samples `count` instances and labels each with estimate_blocked. Record i
/// draws its instance and its label worlds from streams derived from
/// (master_seed, i), so output does not depend on thread count.
Dataset generate_dataset(const Graph& graph, const GenerateOptions& options);

/// Throws FingerprintMismatch when the dataset was generated on another graph.
void check_dataset_graph(const Dataset& dataset, const Graph& graph);

/// Fills missing feature vectors.
void attach_features(Dataset& dataset, const Graph& graph, const NodeStats& stats);

/// Header line then one JSON record per line.
void write_dataset(std::ostream& out, const Dataset& dataset);
std::string dataset_to_jsonl(const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

/// Trains the estimator on a dataset whose records all carry features.
/// The resulting model inherits the dataset's radius and graph fingerprint.
TrainResult train(const Dataset& dataset, const TrainConfig& config, std::uint64_t seed);

}  // namespace nie
