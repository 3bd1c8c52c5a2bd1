#include "nie/datagen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "nie/errors.hpp"
#include "nie/io.hpp"
#include "nie/parallel.hpp"

namespace nie {

using ordered_json = nlohmann::ordered_json;

void SamplerConfig::validate() const {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidParameter("rho must lie in (0,1]");
  if (!(pareto_shape > 1.0)) throw InvalidParameter("Pareto shape must exceed 1");
  if (!(pareto_scale >= 1.0)) throw InvalidParameter("Pareto scale must be >= 1");
  if (k_cap < 1) throw InvalidParameter("k_cap must be >= 1");
}

std::vector<NodeId> high_impact_pool(const Graph& graph, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidParameter("rho must lie in (0,1]");
  const NodeId n = graph.node_count();
  // The epsilon keeps products like 0.1 * 30 from rounding up to 4.
  auto size = static_cast<NodeId>(std::ceil(rho * static_cast<double>(n) - 1e-9));
  size = std::clamp<NodeId>(size, 1, n);
  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  std::stable_sort(nodes.begin(), nodes.end(), [&](NodeId a, NodeId b) {
    return graph.out_degree(a) > graph.out_degree(b);
  });
  nodes.resize(size);
  return nodes;
}

std::int64_t draw_pareto_size(const SamplerConfig& config, Rng& rng) {
  const double u = 1.0 - rng.uniform();  // (0, 1]
  return std::llround(config.pareto_scale / std::pow(u, 1.0 / config.pareto_shape));
}

namespace {

std::vector<NodeId> sample_false_seeds_impl(const Graph& graph, const SamplerConfig& config,
                                            Rng& rng, bool* clamped) {
  config.validate();
  std::vector<NodeId> pool = high_impact_pool(graph, config.rho);
  std::int64_t k = std::min(config.k_cap, draw_pareto_size(config, rng));
  if (clamped) *clamped = false;
  if (k > static_cast<std::int64_t>(pool.size())) {
    k = static_cast<std::int64_t>(pool.size());
    if (clamped) *clamped = true;
  }
  for (std::int64_t i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(rng.below(pool.size() - static_cast<std::size_t>(i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

Instance sample_instance_impl(const Graph& graph, const SamplerConfig& config, Rng& rng,
                              bool* clamped) {
  std::vector<NodeId> false_seeds = sample_false_seeds_impl(graph, config, rng, clamped);
  const NodeId n = graph.node_count();
  const auto available = static_cast<std::int64_t>(n - false_seeds.size());
  std::int64_t k_t = rng.between(0, static_cast<std::int64_t>(false_seeds.size()));
  k_t = std::min(k_t, available);

  std::vector<NodeId> true_seeds;
  true_seeds.reserve(static_cast<std::size_t>(k_t));
  if (2 * k_t <= available) {
    std::unordered_set<NodeId> taken(false_seeds.begin(), false_seeds.end());
    while (static_cast<std::int64_t>(true_seeds.size()) < k_t) {
      const auto v = static_cast<NodeId>(rng.below(n));
      if (taken.insert(v).second) true_seeds.push_back(v);
    }
  } else {
    std::vector<NodeId> rest;
    rest.reserve(static_cast<std::size_t>(available));
    std::size_t f = 0;
    for (NodeId v = 0; v < n; ++v) {
      if (f < false_seeds.size() && false_seeds[f] == v) {
        ++f;
        continue;
      }
      rest.push_back(v);
    }
    for (std::int64_t i = 0; i < k_t; ++i) {
      const auto j = static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(rng.below(rest.size() - static_cast<std::size_t>(i)));
      std::swap(rest[static_cast<std::size_t>(i)], rest[j]);
      true_seeds.push_back(rest[static_cast<std::size_t>(i)]);
    }
  }
  return Instance::make(graph, std::move(false_seeds), std::move(true_seeds));
}

}  // namespace

std::vector<NodeId> sample_false_seeds(const Graph& graph, const SamplerConfig& config, Rng& rng) {
  return sample_false_seeds_impl(graph, config, rng, nullptr);
}

Instance sample_instance(const Graph& graph, const SamplerConfig& config, Rng& rng) {
  return sample_instance_impl(graph, config, rng, nullptr);
}

Dataset generate_dataset(const Graph& graph, const GenerateOptions& options) {
  if (options.count < 1) throw InvalidParameter("dataset count must be >= 1");
  if (options.label_replications < 1) throw InvalidParameter("label replications must be >= 1");
  if (options.h_radius < 1) throw InvalidParameter("radius H must be >= 1");
  options.sampler.validate();

  Dataset ds;
  ds.graph_fingerprint = graph.fingerprint();
  ds.label_replications = options.label_replications;
  ds.h_radius = options.h_radius;
  ds.records.resize(static_cast<std::size_t>(options.count));

  const std::uint64_t instance_root = derive_seed(options.master_seed, 0x1157);
  const std::uint64_t label_root = derive_seed(options.master_seed, 0x1abe1);
  std::atomic<std::size_t> clamped_draws{0};
  parallel_for(ds.records.size(), [&](std::size_t begin, std::size_t end) {
    std::optional<Featurizer> featurizer;
    if (options.stats) featurizer.emplace(graph, *options.stats, options.h_radius);
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(derive_seed(instance_root, i));
      DatasetRecord& rec = ds.records[i];
      bool clamped = false;
      rec.instance = sample_instance_impl(graph, options.sampler, rng, &clamped);
      if (clamped) ++clamped_draws;
      rec.label = estimate_blocked(graph, rec.instance, options.label_replications,
                                   derive_seed(label_root, i))
                      .mean;
      if (featurizer) rec.features = (*featurizer)(rec.instance);
    }
  });
  ds.clamped_draws = clamped_draws.load();
  return ds;
}

void check_dataset_graph(const Dataset& dataset, const Graph& graph) {
  if (dataset.graph_fingerprint != graph.fingerprint()) {
    throw FingerprintMismatch("dataset was generated for graph " + dataset.graph_fingerprint +
                              ", not " + graph.fingerprint());
  }
}

void attach_features(Dataset& dataset, const Graph& graph, const NodeStats& stats) {
  check_dataset_graph(dataset, graph);
  parallel_for(dataset.records.size(), [&](std::size_t begin, std::size_t end) {
    Featurizer featurizer(graph, stats, dataset.h_radius);
    for (std::size_t i = begin; i < end; ++i) {
      auto& rec = dataset.records[i];
      if (!rec.features) rec.features = featurizer(rec.instance);
    }
  });
}

// ---------------------------------------------------------------------------
// JSON lines

void write_dataset(std::ostream& out, const Dataset& dataset) {
  ordered_json header;
  header["graph_fingerprint"] = dataset.graph_fingerprint;
  header["label_replications"] = dataset.label_replications;
  header["h_radius"] = dataset.h_radius;
  header["count"] = dataset.records.size();
  out << header.dump() << '\n';
  for (const auto& rec : dataset.records) {
    ordered_json j;
    j["s_f"] = rec.instance.false_seeds;
    j["s_t"] = rec.instance.true_seeds;
    j["label"] = rec.label;
    if (rec.features) j["features"] = rec.features->to_array();
    out << j.dump() << '\n';
  }
}

std::string dataset_to_jsonl(const Dataset& dataset) {
  std::ostringstream out;
  write_dataset(out, dataset);
  return out.str();
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  write_file_atomic(path, dataset_to_jsonl(dataset));
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  std::int64_t expected = -1;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (expected < 0) {
        ds.graph_fingerprint = j.at("graph_fingerprint").get<std::string>();
        ds.label_replications = j.at("label_replications").get<std::int64_t>();
        ds.h_radius = j.at("h_radius").get<std::uint32_t>();
        expected = j.at("count").get<std::int64_t>();
        ds.records.reserve(static_cast<std::size_t>(expected));
        continue;
      }
      DatasetRecord rec;
      auto sf = j.at("s_f").get<std::vector<NodeId>>();
      auto st = j.at("s_t").get<std::vector<NodeId>>();
      std::sort(sf.begin(), sf.end());
      std::sort(st.begin(), st.end());
      std::vector<NodeId> both;
      std::set_intersection(sf.begin(), sf.end(), st.begin(), st.end(), std::back_inserter(both));
      if (sf.empty() || !both.empty()) throw ParseError(line_no, "record violates seed-set invariants");
      rec.instance = Instance{std::move(sf), std::move(st)};
      rec.label = j.at("label").get<double>();
      if (!std::isfinite(rec.label)) throw ParseError(line_no, "label is not finite");
      if (j.contains("features")) {
        const auto f = j.at("features").get<std::vector<double>>();
        if (f.size() != kFeatureCount) throw ParseError(line_no, "features must have 7 entries");
        rec.features = FeatureVector::from_array(std::span<const double, kFeatureCount>(f.data(), kFeatureCount));
      }
      ds.records.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, std::string("malformed dataset line: ") + e.what());
  }
  if (expected < 0) throw ParseError("dataset has no header line");
  if (static_cast<std::int64_t>(ds.records.size()) != expected) {
    throw ParseError("dataset header promises " + std::to_string(expected) + " records, found " +
                     std::to_string(ds.records.size()));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return read_dataset(in);
}

TrainResult train(const Dataset& dataset, const TrainConfig& config, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(dataset.records.size());
  Eigen::MatrixXd inputs(n, static_cast<Eigen::Index>(kFeatureCount));
  std::vector<double> labels;
  labels.reserve(dataset.records.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = dataset.records[static_cast<std::size_t>(i)];
    if (!rec.features) throw InvalidInput("record " + std::to_string(i) + " has no features");
    const auto a = rec.features->to_array();
    for (std::size_t c = 0; c < kFeatureCount; ++c) inputs(i, static_cast<Eigen::Index>(c)) = a[c];
    labels.push_back(rec.label);
  }
  TrainResult result = train_mlp(inputs, labels, config, seed);
  result.model.h_radius = dataset.h_radius;
  result.model.graph_fingerprint = dataset.graph_fingerprint;
  return result;
}

}  // namespace nie
