#include "nie/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nie/errors.hpp"
#include "nie/io.hpp"

namespace nie {

std::string to_string(BenchMethod method) {
  switch (method) {
    case BenchMethod::kNieCelf:
      return "nie-celf";
    case BenchMethod::kMcsCelf:
      return "mcs-celf";
  }
  return "unknown";
}

BenchMethod parse_bench_method(const std::string& name) {
  if (name == "nie-celf" || name == "nie") return BenchMethod::kNieCelf;
  if (name == "mcs-celf" || name == "mcs") return BenchMethod::kMcsCelf;
  throw ConfigError("unknown bench method '" + name + "' (expected nie-celf or mcs-celf)");
}

namespace {

constexpr std::uint64_t kEvalStream = 0xe7a1;
constexpr std::uint64_t kSolveStream = 0x5017e;

void check_setup(const BenchSetup& setup, const std::vector<BenchMethod>& methods, bool need_nie) {
  if (setup.graph == nullptr) throw ConfigError("bench needs a graph");
  for (BenchMethod m : methods) need_nie = need_nie || m == BenchMethod::kNieCelf;
  if (need_nie && setup.model == nullptr) throw ConfigError("nie-celf needs a trained model");
  if (need_nie && setup.stats == nullptr) throw ConfigError("nie-celf needs node stats");
}

std::unique_ptr<Estimator> make_estimator(const BenchSetup& setup, BenchMethod method) {
  if (method == BenchMethod::kNieCelf) {
    return std::make_unique<NieEstimator>(*setup.graph, *setup.stats, *setup.model);
  }
  return std::make_unique<McsEstimator>(*setup.graph, setup.mcs_replications,
                                        derive_seed(setup.seed, kSolveStream));
}

double evaluate(const BenchSetup& setup, std::span<const NodeId> s_f, std::span<const NodeId> s_t) {
  return evaluate_solution(*setup.graph, s_f, s_t, setup.eval_replications,
                           derive_seed(setup.seed, kEvalStream))
      .mean;
}

BenchReport base_report(const BenchSetup& setup, std::string protocol, double budget) {
  BenchReport report;
  report.protocol = std::move(protocol);
  report.graph_fingerprint = setup.graph->fingerprint();
  report.seed = setup.seed;
  report.mcs_replications = setup.mcs_replications;
  report.eval_replications = setup.eval_replications;
  report.budget_seconds = budget;
  report.precompute_seconds = setup.precompute_seconds;
  report.training_seconds = setup.training_seconds;
  return report;
}

bool meets(double quality, double target) {
  return quality >= target - 1e-9 * std::max(1.0, std::abs(target));
}

}  // namespace

BenchReport run_time_to_target(const BenchSetup& setup,
                               const std::vector<std::vector<NodeId>>& problems,
                               const std::vector<BenchMethod>& methods, TargetSource target,
                               double timeout_seconds) {
  const bool nie_target = target.kind == TargetSource::Kind::kNieFinal;
  check_setup(setup, methods, nie_target);
  BenchReport report = base_report(setup, "time_to_target", timeout_seconds);

  for (std::size_t pid = 0; pid < problems.size(); ++pid) {
    const std::vector<NodeId>& s_f = problems[pid];
    const auto k = static_cast<std::int64_t>(s_f.size());
    double goal = target.value;
    bool nie_done = false;

    if (nie_target) {
      auto est = make_estimator(setup, BenchMethod::kNieCelf);
      const CelfTrace trace = celf(*est, *setup.graph, s_f, k);
      goal = evaluate(setup, s_f, trace.chosen);
      BenchRow row;
      row.problem_id = pid;
      row.method = BenchMethod::kNieCelf;
      row.runtime_seconds = trace.solve_seconds();
      row.blocked_influence = goal;
      row.evaluations_used = trace.evaluations_used;
      row.reached_target = true;
      row.target = goal;
      row.true_seeds = trace.chosen;
      report.rows.push_back(std::move(row));
      nie_done = true;
    }

    for (BenchMethod method : methods) {
      if (method == BenchMethod::kNieCelf && nie_done) continue;
      auto est = make_estimator(setup, method);
      BenchRow row;
      row.problem_id = pid;
      row.method = method;
      row.target = goal;
      double before_last_pick = 0.0;
      SolveControl control;
      control.budget_seconds = timeout_seconds;
      control.on_pick = [&](const CelfTrace& trace) {
        const double quality = evaluate(setup, s_f, trace.chosen);
        row.blocked_influence = quality;
        row.true_seeds = trace.chosen;
        if (meets(quality, goal)) {
          row.reached_target = true;
          row.runtime_seconds = before_last_pick;
          return false;
        }
        before_last_pick = trace.solve_seconds();
        return true;
      };
      const CelfTrace trace = celf(*est, *setup.graph, s_f, k, control);
      row.evaluations_used = trace.evaluations_used;
      if (!row.reached_target) {
        row.runtime_seconds = trace.completed ? trace.solve_seconds() : timeout_seconds;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

BenchReport run_quality_within_budget(const BenchSetup& setup,
                                      const std::vector<std::vector<NodeId>>& problems,
                                      const std::vector<BenchMethod>& methods,
                                      double budget_seconds) {
  check_setup(setup, methods, false);
  BenchReport report = base_report(setup, "quality_within_budget", budget_seconds);
  for (std::size_t pid = 0; pid < problems.size(); ++pid) {
    const std::vector<NodeId>& s_f = problems[pid];
    for (BenchMethod method : methods) {
      auto est = make_estimator(setup, method);
      SolveControl control;
      control.budget_seconds = budget_seconds;
      const CelfTrace trace = celf(*est, *setup.graph, s_f, static_cast<std::int64_t>(s_f.size()), control);
      BenchRow row;
      row.problem_id = pid;
      row.method = method;
      row.evaluations_used = trace.evaluations_used;
      if (trace.completed) {
        row.runtime_seconds = trace.solve_seconds();
        row.blocked_influence = evaluate(setup, s_f, trace.chosen);
        row.true_seeds = trace.chosen;
      } else {
        row.runtime_seconds = budget_seconds;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

namespace {

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string report_csv(const BenchReport& report, const Graph* labels) {
  std::ostringstream out;
  out << "problem_id,method,runtime_seconds,blocked_influence,evaluations_used,reached_target,target,s_t\n";
  for (const BenchRow& row : report.rows) {
    out << row.problem_id << ',' << to_string(row.method) << ',' << exact(row.runtime_seconds) << ','
        << (row.blocked_influence ? exact(*row.blocked_influence) : "") << ',' << row.evaluations_used
        << ',' << (row.reached_target ? "true" : "false") << ','
        << (row.target ? exact(*row.target) : "") << ',';
    for (std::size_t i = 0; i < row.true_seeds.size(); ++i) {
      if (i > 0) out << ' ';
      if (labels) {
        out << labels->label(row.true_seeds[i]);
      } else {
        out << row.true_seeds[i];
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string report_metadata_json(const BenchReport& report) {
  nlohmann::ordered_json j;
  j["protocol"] = report.protocol;
  j["graph_fingerprint"] = report.graph_fingerprint;
  j["seed"] = report.seed;
  j["mcs_replications"] = report.mcs_replications;
  j["eval_replications"] = report.eval_replications;
  j["budget_seconds"] = report.budget_seconds;
  j["offline_precompute_seconds"] = report.precompute_seconds;
  j["offline_training_seconds"] = report.training_seconds;
  j["environment_dependent_columns"] = {"runtime_seconds"};
  j["rows"] = report.rows.size();
  return j.dump(2) + "\n";
}

void save_report(const std::filesystem::path& path, const BenchReport& report, const Graph* labels) {
  write_file_atomic(path, report_csv(report, labels));
  std::filesystem::path meta = path;
  meta += ".json";
  write_file_atomic(meta, report_metadata_json(report));
}

}  // namespace nie
