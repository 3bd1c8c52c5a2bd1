#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nie/graph.hpp"
#include "nie/mlp.hpp"
#include "nie/optimizer.hpp"

namespace nie {

enum class BenchMethod { kNieCelf, kMcsCelf };

std::string to_string(BenchMethod method);
/// Accepts "nie-celf" and "mcs-celf". Throws ConfigError otherwise.
BenchMethod parse_bench_method(const std::string& name);

struct BenchRow {
  std::size_t problem_id = 0;
  BenchMethod method = BenchMethod::kNieCelf;
  double runtime_seconds = 0.0;              ///< solve phase only; environment dependent
  std::optional<double> blocked_influence;  ///< MCS-evaluated; absent without a solution
  std::int64_t evaluations_used = 0;
  bool reached_target = false;
  std::optional<double> target;  ///< time-to-target runs only
  std::vector<NodeId> true_seeds;
};

struct BenchSetup {
  const Graph* graph = nullptr;
  const NodeStats* stats = nullptr;  ///< required by nie-celf
  const MlpModel* model = nullptr;   ///< required by nie-celf
  std::int64_t mcs_replications = 10'000;   ///< inside MCS-CELF
  std::int64_t eval_replications = kDefaultEvalReplications;
  std::uint64_t seed = 0;
  /// Offline phase timings, reported but never added to runtimes.
  double precompute_seconds = 0.0;
  double training_seconds = 0.0;
};

struct BenchReport {
  std::string protocol;  ///< "time_to_target" or "quality_within_budget"
  std::string graph_fingerprint;
  std::uint64_t seed = 0;
  std::int64_t mcs_replications = 0;
  std::int64_t eval_replications = 0;
  double budget_seconds = 0.0;
  double precompute_seconds = 0.0;
  double training_seconds = 0.0;
  std::vector<BenchRow> rows;
};

struct TargetSource {
  enum class Kind { kNieFinal, kExplicit };
  Kind kind = Kind::kNieFinal;
  double value = 0.0;

  static TargetSource nie_final() { return {}; }
  static TargetSource explicit_value(double v) { return {Kind::kExplicit, v}; }
};

/// For each problem (a false-seed set, K = |S_f|) fixes the target, then runs
/// every method, evaluating its incumbent after each pick. A method reaching
/// the target at pick j reports the solve time accumulated up to pick j - 1.
/// A method that never reaches it reports the timeout. With a nie_final
/// target, NIE-CELF runs first to completion and defines the target. Throws
/// ConfigError when nie-celf is needed but no model or stats were given.
BenchReport run_time_to_target(const BenchSetup& setup,
                               const std::vector<std::vector<NodeId>>& problems,
                               const std::vector<BenchMethod>& methods, TargetSource target,
                               double timeout_seconds);

/// Each method solves each problem under a solve-time budget; complete
/// solutions are scored by MCS, incomplete ones report no quality.
BenchReport run_quality_within_budget(const BenchSetup& setup,
                                      const std::vector<std::vector<NodeId>>& problems,
                                      const std::vector<BenchMethod>& methods,
                                      double budget_seconds);

/// s_t holds node ids, or the graph's labels when `labels` is given.
std::string report_csv(const BenchReport& report, const Graph* labels = nullptr);
std::string report_metadata_json(const BenchReport& report);

/// Writes the CSV at `path` and the metadata at `path` + ".json", each via
/// temp file and rename.
void save_report(const std::filesystem::path& path, const BenchReport& report,
                 const Graph* labels = nullptr);

}  // namespace nie
