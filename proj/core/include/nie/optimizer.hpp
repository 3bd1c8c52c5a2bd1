#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nie/cascade.hpp"
#include "nie/features.hpp"
#include "nie/graph.hpp"
#include "nie/mlp.hpp"

namespace nie {

/// Scores a (S_f, S_t) pair by its blocked influence. Implementations must be
/// deterministic: the same sets always give the same double.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string kind() const = 0;
  virtual double score(std::span<const NodeId> false_seeds, std::span<const NodeId> true_seeds) = 0;
};

/// Featurize then forward through the trained MLP.
class NieEstimator final : public Estimator {
 public:
  /// Throws FingerprintMismatch when the model belongs to another graph.
  NieEstimator(const Graph& graph, const NodeStats& stats, const MlpModel& model);
  std::string kind() const override { return "nie"; }
  double score(std::span<const NodeId> false_seeds, std::span<const NodeId> true_seeds) override;

 private:
  const MlpModel* model_;
  Featurizer featurizer_;
};

/// Common-random-number Monte Carlo: every evaluation uses the same r worlds
/// under one master seed, so scores are a deterministic set function and
/// differences between candidates carry no independent sampling noise. The
/// S_t = {} baseline is computed once per false-seed set.
class McsEstimator final : public Estimator {
 public:
  McsEstimator(const Graph& graph, std::int64_t replications, std::uint64_t master_seed);
  std::string kind() const override;
  double score(std::span<const NodeId> false_seeds, std::span<const NodeId> true_seeds) override;

 private:
  const Graph* graph_;
  std::int64_t replications_;
  std::uint64_t master_seed_;
  std::vector<NodeId> baseline_seeds_;
  std::int64_t baseline_total_ = 0;
};

class ExactEstimator final : public Estimator {
 public:
  explicit ExactEstimator(const Graph& graph, std::size_t max_edges = kDefaultOracleEdgeLimit);
  std::string kind() const override { return "exact"; }
  double score(std::span<const NodeId> false_seeds, std::span<const NodeId> true_seeds) override;

 private:
  const Graph* graph_;
  std::size_t max_edges_;
};

/// Wraps an arbitrary callable; used for synthetic objectives.
class FunctionEstimator final : public Estimator {
 public:
  using Fn = std::function<double(std::span<const NodeId>, std::span<const NodeId>)>;
  FunctionEstimator(std::string kind, Fn fn) : kind_(std::move(kind)), fn_(std::move(fn)) {}
  std::string kind() const override { return kind_; }
  double score(std::span<const NodeId> f, std::span<const NodeId> t) override { return fn_(f, t); }

 private:
  std::string kind_;
  Fn fn_;
};

struct CelfTrace {
  std::vector<NodeId> chosen;
  std::vector<double> marginal_gains;
  std::vector<double> scores;        ///< estimator score of S_t after each pick
  std::vector<double> pick_seconds;  ///< solve wall time spent on each pick
  std::int64_t evaluations_used = 0;
  bool completed = false;  ///< false when stopped by budget or callback

  double solve_seconds() const;
};

struct SolveControl {
  /// Solve-time budget; time spent inside on_pick is not charged.
  double budget_seconds = std::numeric_limits<double>::infinity();
  /// Called after each pick; return false to stop early.
  std::function<bool(const CelfTrace&)> on_pick;
};

/// Plain greedy: every round scores S_t + {v} for every remaining candidate
/// and keeps the largest gain, ties to the smallest id. Throws
/// InvalidParameter when K < 1 or fewer than K candidates exist, and
/// EstimatorFailure naming the candidate when the estimator throws.
CelfTrace greedy(Estimator& estimator, const Graph& graph, std::span<const NodeId> false_seeds,
                 std::int64_t k, const SolveControl& control = {});

/// Lazy-forward greedy. Stale gains act as upper bounds; the top entry is
/// re-scored against the current S_t and taken once it is fresh and still on
/// top. Picks match greedy() whenever the estimator is submodular.
CelfTrace celf(Estimator& estimator, const Graph& graph, std::span<const NodeId> false_seeds,
               std::int64_t k, const SolveControl& control = {});

inline constexpr std::int64_t kDefaultEvalReplications = 10'000;

/// Final quality of a solution by Monte Carlo.
Estimate evaluate_solution(const Graph& graph, std::span<const NodeId> false_seeds,
                           std::span<const NodeId> true_seeds,
                           std::int64_t r = kDefaultEvalReplications, std::uint64_t seed = 0);

}  // namespace nie
