#include "nie/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <queue>
#include <string>

#include "nie/errors.hpp"

namespace nie {

NieEstimator::NieEstimator(const Graph& graph, const NodeStats& stats, const MlpModel& model)
    : model_(&model), featurizer_(graph, stats, model.h_radius) {
  check_model_graph(model, graph);
}

double NieEstimator::score(std::span<const NodeId> false_seeds, std::span<const NodeId> true_seeds) {
  featurizer_.bind_false_seeds(false_seeds);
  return model_->forward(featurizer_.with_true_seeds(true_seeds));
}

McsEstimator::McsEstimator(const Graph& graph, std::int64_t replications, std::uint64_t master_seed)
    : graph_(&graph), replications_(replications), master_seed_(master_seed) {
  if (replications < 1) {
    throw InvalidParameter("replication count must be >= 1, got " + std::to_string(replications));
  }
}

std::string McsEstimator::kind() const { return "mcs"; }

double McsEstimator::score(std::span<const NodeId> false_seeds, std::span<const NodeId> true_seeds) {
  if (true_seeds.empty()) return 0.0;
  if (baseline_seeds_.empty() ||
      !std::equal(false_seeds.begin(), false_seeds.end(), baseline_seeds_.begin(), baseline_seeds_.end())) {
    baseline_seeds_.assign(false_seeds.begin(), false_seeds.end());
    baseline_total_ = total_not_false(*graph_, false_seeds, {}, replications_, master_seed_);
  }
  const std::int64_t with = total_not_false(*graph_, false_seeds, true_seeds, replications_, master_seed_);
  return static_cast<double>(with - baseline_total_) / static_cast<double>(replications_);
}

ExactEstimator::ExactEstimator(const Graph& graph, std::size_t max_edges)
    : graph_(&graph), max_edges_(max_edges) {
  if (graph.edge_count() > max_edges) {
    throw OracleRefusal("exact oracle is limited to m <= " + std::to_string(max_edges) +
                        " edges; graph has " + std::to_string(graph.edge_count()));
  }
}

double ExactEstimator::score(std::span<const NodeId> false_seeds, std::span<const NodeId> true_seeds) {
  const Instance inst = Instance::make(*graph_, {false_seeds.begin(), false_seeds.end()},
                                       {true_seeds.begin(), true_seeds.end()});
  return exact_blocked(*graph_, inst, max_edges_);
}

double CelfTrace::solve_seconds() const {
  return std::accumulate(pick_seconds.begin(), pick_seconds.end(), 0.0);
}

namespace {

using Clock = std::chrono::steady_clock;

/// Shared bookkeeping for greedy and celf: candidate set, S_t, timing and the
/// callback protocol.
class Search {
 public:
  Search(Estimator& estimator, const Graph& graph, std::span<const NodeId> false_seeds,
         std::int64_t k, const SolveControl& control)
      : estimator_(estimator), control_(control), k_(k) {
    false_seeds_.assign(false_seeds.begin(), false_seeds.end());
    std::sort(false_seeds_.begin(), false_seeds_.end());
    false_seeds_.erase(std::unique(false_seeds_.begin(), false_seeds_.end()), false_seeds_.end());
    if (false_seeds_.empty()) throw InvalidInput("solve needs at least one false seed");
    for (NodeId v : false_seeds_) {
      if (!graph.valid_node(v)) throw InvalidInput("false seed " + std::to_string(v) + " is not a node");
    }
    if (k < 1) throw InvalidParameter("K must be >= 1, got " + std::to_string(k));
    for (NodeId v = 0; v < graph.node_count(); ++v) {
      if (!std::binary_search(false_seeds_.begin(), false_seeds_.end(), v)) candidates_.push_back(v);
    }
    if (static_cast<std::int64_t>(candidates_.size()) < k) {
      throw InvalidParameter("K = " + std::to_string(k) + " exceeds the " +
                             std::to_string(candidates_.size()) + " nodes outside S_f");
    }
    segment_start_ = Clock::now();
  }

  const std::vector<NodeId>& candidates() const { return candidates_; }
  std::int64_t k() const { return k_; }
  CelfTrace& trace() { return trace_; }
  double current() const { return current_; }

  bool over_budget() const {
    const double spent = trace_.solve_seconds() + seconds_since(segment_start_);
    return spent > control_.budget_seconds;
  }

  /// Baseline f(S_f, {}) counts as one evaluation.
  void score_base() { current_ = evaluate_set(trial_); }

  /// Score of S_t + {v}; the estimator's exception is rewrapped with v.
  double evaluate_with(NodeId v) {
    trial_.assign(chosen_sorted_.begin(), chosen_sorted_.end());
    trial_.insert(std::upper_bound(trial_.begin(), trial_.end(), v), v);
    try {
      return evaluate_set(trial_);
    } catch (const EstimatorFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw EstimatorFailure(v, e.what());
    }
  }

  /// Records a pick; returns false when the search should stop.
  bool pick(NodeId v, double score) {
    trace_.chosen.push_back(v);
    trace_.marginal_gains.push_back(score - current_);
    trace_.scores.push_back(score);
    trace_.pick_seconds.push_back(seconds_since(segment_start_));
    chosen_sorted_.insert(std::upper_bound(chosen_sorted_.begin(), chosen_sorted_.end(), v), v);
    current_ = score;
    const bool done = static_cast<std::int64_t>(trace_.chosen.size()) == k_;
    if (done) trace_.completed = true;
    bool keep_going = true;
    if (control_.on_pick) keep_going = control_.on_pick(trace_);
    segment_start_ = Clock::now();
    if (!keep_going) trace_.completed = done;
    return keep_going && !done;
  }

  /// Closes the timing of an unfinished pick when the search is abandoned.
  void abandon() {
    trace_.completed = false;
    trace_.pick_seconds.push_back(seconds_since(segment_start_));
  }

  bool is_chosen(NodeId v) const {
    return std::binary_search(chosen_sorted_.begin(), chosen_sorted_.end(), v);
  }

 private:
  Estimator& estimator_;
  const SolveControl& control_;
  std::int64_t k_;
  std::vector<NodeId> false_seeds_;
  std::vector<NodeId> candidates_;
  std::vector<NodeId> chosen_sorted_;
  std::vector<NodeId> trial_;
  CelfTrace trace_;
  double current_ = 0.0;
  Clock::time_point segment_start_;

  static double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
  }

  double evaluate_set(std::span<const NodeId> true_seeds) {
    ++trace_.evaluations_used;
    return estimator_.score(false_seeds_, true_seeds);
  }
};

}  // namespace

CelfTrace greedy(Estimator& estimator, const Graph& graph, std::span<const NodeId> false_seeds,
                 std::int64_t k, const SolveControl& control) {
  Search search(estimator, graph, false_seeds, k, control);
  search.score_base();
  while (true) {
    bool found = false;
    NodeId best = 0;
    double best_gain = 0.0;
    double best_score = 0.0;
    for (NodeId v : search.candidates()) {
      if (search.is_chosen(v)) continue;
      if (search.over_budget()) {
        search.abandon();
        return std::move(search.trace());
      }
      const double s = search.evaluate_with(v);
      const double gain = s - search.current();
      if (!found || gain > best_gain) {
        found = true;
        best = v;
        best_gain = gain;
        best_score = s;
      }
    }
    if (!search.pick(best, best_score)) break;
  }
  return std::move(search.trace());
}

CelfTrace celf(Estimator& estimator, const Graph& graph, std::span<const NodeId> false_seeds,
               std::int64_t k, const SolveControl& control) {
  struct Entry {
    double gain;
    double score;
    NodeId node;
    std::int64_t round;  ///< pick round in which `gain` was computed
  };
  // Largest gain on top; equal gains surface the smaller id first.
  auto lower = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.node > b.node;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(lower)> heap(lower);

  Search search(estimator, graph, false_seeds, k, control);
  search.score_base();
  for (NodeId v : search.candidates()) {
    if (search.over_budget()) {
      search.abandon();
      return std::move(search.trace());
    }
    const double s = search.evaluate_with(v);
    heap.push(Entry{s - search.current(), s, v, 0});
  }

  std::int64_t round = 0;
  while (true) {
    const Entry top = heap.top();
    heap.pop();
    if (top.round == round) {
      if (!search.pick(top.node, top.score)) break;
      ++round;
      continue;
    }
    if (search.over_budget()) {
      search.abandon();
      return std::move(search.trace());
    }
    const double s = search.evaluate_with(top.node);
    heap.push(Entry{s - search.current(), s, top.node, round});
  }
  return std::move(search.trace());
}

Estimate evaluate_solution(const Graph& graph, std::span<const NodeId> false_seeds,
                           std::span<const NodeId> true_seeds, std::int64_t r, std::uint64_t seed) {
  const Instance inst = Instance::make(graph, {false_seeds.begin(), false_seeds.end()},
                                       {true_seeds.begin(), true_seeds.end()});
  return estimate_blocked(graph, inst, r, seed);
}

}  // namespace nie
