// nie: command-line driver for the influence-blocking pipeline.
//
// Seed sets on the command line and in solution files use the node labels of
// the edge-list file. Datasets and stats caches store compacted ids; both are
// keyed by the graph fingerprint so they cannot be paired with another graph.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nie/bench.hpp"
#include "nie/datagen.hpp"
#include "nie/errors.hpp"
#include "nie/graph.hpp"
#include "nie/io.hpp"
#include "nie/optimizer.hpp"
#include "nie/parallel.hpp"
#include "nie/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    nie::write_file_atomic(out, text);
  }
}

nie::Graph load_graph(const std::string& path) {
  nie::LoadResult r = nie::load_edge_list_file(path);
  if (r.self_loops_dropped > 0 || r.duplicates_dropped > 0) {
    std::cerr << "warning: dropped " << r.self_loops_dropped << " self-loops and "
              << r.duplicates_dropped << " duplicate edges from " << path << "\n";
  }
  if (!r.graph.explicit_probabilities()) return nie::assign_degree_probabilities(r.graph);
  return std::move(r.graph);
}

/// Comma or whitespace separated labels; "@path" reads them from a file.
std::vector<std::int64_t> parse_label_list(const std::string& spec) {
  std::string text = spec;
  if (!spec.empty() && spec[0] == '@') text = nie::read_file(spec.substr(1));
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  std::istringstream in(text);
  std::vector<std::int64_t> labels;
  std::string tok;
  while (in >> tok) {
    std::int64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw nie::ConfigError("bad node label '" + tok + "' in seed list");
    }
    labels.push_back(v);
  }
  return labels;
}

std::vector<nie::NodeId> resolve(const nie::Graph& g, const std::string& spec) {
  std::vector<nie::NodeId> ids;
  for (std::int64_t label : parse_label_list(spec)) {
    const auto id = g.node_with_label(label);
    if (!id) throw nie::InvalidInput("node " + std::to_string(label) + " is not in the graph");
    ids.push_back(*id);
  }
  return ids;
}

ordered_json labels_of(const nie::Graph& g, const std::vector<nie::NodeId>& ids) {
  ordered_json a = ordered_json::array();
  for (nie::NodeId v : ids) a.push_back(g.label(v));
  return a;
}

/// Loads the cache at `path` when it matches the graph; otherwise computes
/// stats and, if a path was given, rewrites the cache.
nie::NodeStats obtain_stats(const nie::Graph& g, const std::string& path, double* seconds = nullptr) {
  if (!path.empty() && fs::exists(path)) {
    try {
      return nie::load_stats_cache(path, g.fingerprint());
    } catch (const nie::Error& e) {
      std::cerr << "warning: regenerating stats cache " << path << ": " << e.what() << "\n";
    }
  }
  const auto t0 = Clock::now();
  nie::NodeStats stats = nie::compute_node_stats(g, nie::ClosenessMode::automatic(g.node_count()));
  if (seconds) *seconds = seconds_since(t0);
  if (!path.empty()) nie::save_stats_cache(path, stats, g.fingerprint());
  return stats;
}

struct Shared {
  std::string graph;
  std::string stats;
  std::string model;
  std::string out;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::uint32_t h = 2;
};

void add_graph(CLI::App* cmd, Shared& s, bool required = true) {
  auto* o = cmd->add_option("--graph", s.graph, "edge-list file (u v [p] per line)");
  if (required) o->required();
}

void add_seed(CLI::App* cmd, Shared& s) {
  cmd->add_option("--seed", s.seed, "master seed")->capture_default_str();
}

void add_out(CLI::App* cmd, Shared& s, bool required = false) {
  auto* o = cmd->add_option("--out", s.out, "output path");
  if (required) o->required();
}

// --- commands --------------------------------------------------------------

struct GenGraphArgs {
  nie::PowerLawSpec spec;
};

void cmd_gengraph(const Shared& s, const GenGraphArgs& a) {
  nie::PowerLawSpec spec = a.spec;
  spec.seed = s.seed;
  const nie::Graph g = nie::power_law_graph(spec);
  std::ostringstream out;
  nie::write_edge_list(out, g);
  emit(s.out, out.str());
  std::cerr << "graph " << g.node_count() << " nodes, " << g.edge_count() << " edges, fingerprint "
            << g.fingerprint() << "\n";
}

void cmd_precompute(const Shared& s) {
  const nie::Graph g = load_graph(s.graph);
  if (fs::exists(s.out)) {
    try {
      nie::load_stats_cache(s.out, g.fingerprint());
      std::cout << "stats cache " << s.out << " is up to date\n";
      return;
    } catch (const nie::Error& e) {
      std::cerr << "warning: regenerating stats cache " << s.out << ": " << e.what() << "\n";
    }
  }
  const auto t0 = Clock::now();
  const nie::NodeStats stats = nie::compute_node_stats(g, nie::ClosenessMode::automatic(g.node_count()));
  const double secs = seconds_since(t0);
  nie::save_stats_cache(s.out, stats, g.fingerprint());
  std::cout << "precomputed stats for " << g.node_count() << " nodes in " << shortest(secs) << " s\n";
}

struct GenDataArgs {
  std::int64_t count = 10'000;
  std::int64_t replications = 1000;
  nie::SamplerConfig sampler;
  bool features = true;
};

void cmd_gendata(const Shared& s, const GenDataArgs& a) {
  const nie::Graph g = load_graph(s.graph);
  std::optional<nie::NodeStats> stats;
  if (a.features) stats = obtain_stats(g, s.stats);
  nie::GenerateOptions o;
  o.count = a.count;
  o.label_replications = a.replications;
  o.sampler = a.sampler;
  o.master_seed = s.seed;
  o.h_radius = s.h;
  o.stats = stats ? &*stats : nullptr;
  const auto t0 = Clock::now();
  const nie::Dataset ds = nie::generate_dataset(g, o);
  nie::save_dataset(s.out, ds);
  std::cerr << "generated " << ds.records.size() << " records in " << shortest(seconds_since(t0)) << " s";
  if (ds.clamped_draws > 0) std::cerr << " (" << ds.clamped_draws << " seed-set sizes clamped to the pool)";
  std::cerr << "\n";
}

struct TrainArgs {
  std::string dataset;
  std::string report;
  nie::TrainConfig config;
};

void cmd_train(const Shared& s, const TrainArgs& a) {
  nie::Dataset ds = nie::load_dataset(a.dataset);
  const bool missing = std::any_of(ds.records.begin(), ds.records.end(),
                                   [](const nie::DatasetRecord& r) { return !r.features; });
  if (missing) {
    if (s.graph.empty()) throw nie::ConfigError("dataset has no features; pass --graph (and --stats) to attach them");
    const nie::Graph g = load_graph(s.graph);
    nie::check_dataset_graph(ds, g);
    nie::attach_features(ds, g, obtain_stats(g, s.stats));
  }
  const auto t0 = Clock::now();
  const nie::TrainResult r = nie::train(ds, a.config, s.seed);
  const double secs = seconds_since(t0);
  nie::save_model(s.out, r.model);

  ordered_json rep;
  rep["epochs_run"] = r.report.epochs_run;
  rep["best_epoch"] = r.report.best_epoch;
  rep["stopped_early"] = r.report.stopped_early;
  rep["train_mse"] = r.report.train_mse;
  rep["validation_mse"] = r.report.validation_mse;
  nie::write_file_atomic(a.report.empty() ? s.out + ".report.json" : a.report, rep.dump(2) + "\n");
  std::cerr << "trained " << r.report.epochs_run << " epochs (best " << r.report.best_epoch << ") in "
            << shortest(secs) << " s\n";
}

struct SolveArgs {
  std::string sf;
  std::int64_t k = 0;
  std::string estimator = "nie";
  std::int64_t replications = nie::kDefaultEvalReplications;
  std::int64_t eval_replications = nie::kDefaultEvalReplications;
};

void cmd_solve(const Shared& s, const SolveArgs& a) {
  const nie::Graph g = load_graph(s.graph);
  const std::vector<nie::NodeId> sf = resolve(g, a.sf);
  const std::int64_t k = a.k > 0 ? a.k : static_cast<std::int64_t>(sf.size());

  std::optional<nie::NodeStats> stats;
  std::optional<nie::MlpModel> model;
  std::unique_ptr<nie::Estimator> est;
  if (a.estimator == "nie") {
    if (s.model.empty()) throw nie::ConfigError("--estimator nie needs --model");
    model = nie::load_model(s.model);
    nie::check_model_graph(*model, g);
    stats = obtain_stats(g, s.stats);
    est = std::make_unique<nie::NieEstimator>(g, *stats, *model);
  } else if (a.estimator == "mcs") {
    est = std::make_unique<nie::McsEstimator>(g, a.replications, nie::derive_seed(s.seed, 0x5017e));
  } else if (a.estimator == "exact") {
    est = std::make_unique<nie::ExactEstimator>(g);
  } else {
    throw nie::ConfigError("unknown estimator '" + a.estimator + "' (expected nie, mcs or exact)");
  }

  const auto t0 = Clock::now();
  const nie::CelfTrace trace = nie::celf(*est, g, sf, k);
  const double secs = seconds_since(t0);
  const nie::Estimate mcs =
      nie::evaluate_solution(g, sf, trace.chosen, a.eval_replications, nie::derive_seed(s.seed, 0xe7a1));

  std::vector<nie::NodeId> sf_sorted = sf;
  std::sort(sf_sorted.begin(), sf_sorted.end());
  sf_sorted.erase(std::unique(sf_sorted.begin(), sf_sorted.end()), sf_sorted.end());
  ordered_json j;
  j["s_f"] = labels_of(g, sf_sorted);
  j["s_t"] = labels_of(g, trace.chosen);
  j["k"] = k;
  j["estimator"] = est->kind();
  j["predicted"] = trace.scores.empty() ? 0.0 : trace.scores.back();
  j["mcs_value"] = mcs.mean;
  j["mcs_replications"] = mcs.replications;
  emit(s.out, j.dump(2) + "\n");
  std::cerr << "solved K=" << k << " with " << est->kind() << "-celf in " << shortest(secs) << " s, "
            << trace.evaluations_used << " evaluations\n";
}

struct EvalArgs {
  std::string sf;
  std::string st;
  std::int64_t replications = nie::kDefaultEvalReplications;
};

void cmd_eval(const Shared& s, const EvalArgs& a) {
  const nie::Graph g = load_graph(s.graph);
  const nie::Instance inst = nie::Instance::make(g, resolve(g, a.sf), resolve(g, a.st));
  const nie::Estimate e = nie::estimate_blocked(g, inst, a.replications, s.seed);
  ordered_json j;
  j["mean"] = e.mean;
  j["std_error"] = e.std_error;
  j["replications"] = e.replications;
  j["master_seed"] = e.master_seed;
  emit(s.out, j.dump(2) + "\n");
}

struct OracleArgs {
  std::string sf;
  std::string st;
};

void cmd_oracle(const Shared& s, const OracleArgs& a) {
  const nie::Graph g = load_graph(s.graph);
  const nie::Instance inst = nie::Instance::make(g, resolve(g, a.sf), resolve(g, a.st));
  emit(s.out, shortest(nie::exact_blocked(g, inst)) + "\n");
}

struct BenchArgs {
  std::string protocol = "budget";
  std::string methods = "nie-celf,mcs-celf";
  std::string sf;
  std::int64_t problems = 1;
  double budget = 60.0;
  std::optional<double> target;
  std::int64_t mcs_replications = 10'000;
  std::int64_t eval_replications = nie::kDefaultEvalReplications;
  double training_seconds = 0.0;
  nie::SamplerConfig sampler;
};

void cmd_bench(const Shared& s, const BenchArgs& a) {
  const nie::Graph g = load_graph(s.graph);
  std::vector<nie::BenchMethod> methods;
  std::istringstream list(a.methods);
  for (std::string name; std::getline(list, name, ',');) {
    if (!name.empty()) methods.push_back(nie::parse_bench_method(name));
  }
  if (methods.empty()) throw nie::ConfigError("--methods is empty");

  const bool need_nie = std::find(methods.begin(), methods.end(), nie::BenchMethod::kNieCelf) != methods.end() ||
                        (a.protocol == "time" && !a.target);
  std::optional<nie::NodeStats> stats;
  std::optional<nie::MlpModel> model;
  double precompute = 0.0;
  if (need_nie) {
    if (s.model.empty()) throw nie::ConfigError("nie-celf needs --model");
    model = nie::load_model(s.model);
    stats = obtain_stats(g, s.stats, &precompute);
  }

  std::vector<std::vector<nie::NodeId>> problems;
  if (!a.sf.empty()) {
    problems.push_back(resolve(g, a.sf));
  } else {
    nie::Rng rng(nie::derive_seed(s.seed, 0xb0b));
    for (std::int64_t i = 0; i < a.problems; ++i) problems.push_back(nie::sample_false_seeds(g, a.sampler, rng));
  }

  nie::BenchSetup setup;
  setup.graph = &g;
  setup.stats = stats ? &*stats : nullptr;
  setup.model = model ? &*model : nullptr;
  setup.mcs_replications = a.mcs_replications;
  setup.eval_replications = a.eval_replications;
  setup.seed = s.seed;
  setup.precompute_seconds = precompute;
  setup.training_seconds = a.training_seconds;

  nie::BenchReport report;
  if (a.protocol == "budget") {
    report = nie::run_quality_within_budget(setup, problems, methods, a.budget);
  } else if (a.protocol == "time") {
    const nie::TargetSource target =
        a.target ? nie::TargetSource::explicit_value(*a.target) : nie::TargetSource::nie_final();
    report = nie::run_time_to_target(setup, problems, methods, target, a.budget);
  } else {
    throw nie::ConfigError("unknown protocol '" + a.protocol + "' (expected budget or time)");
  }
  if (s.out.empty()) {
    std::cout << nie::report_csv(report, &g);
  } else {
    nie::save_report(s.out, report, &g);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural influence estimation for influence-blocking maximization"};
  // "-h" would collide with the --h radius flag.
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.fallthrough();
  Shared s;
  app.add_option("--threads", s.threads, "worker threads (0 = all cores)")->capture_default_str();

  auto* gengraph = app.add_subcommand("gengraph", "write a synthetic power-law graph");
  GenGraphArgs gg;
  gengraph->add_option("--nodes", gg.spec.nodes)->capture_default_str();
  gengraph->add_option("--edges", gg.spec.edges)->capture_default_str();
  gengraph->add_option("--exponent", gg.spec.exponent)->capture_default_str();
  add_seed(gengraph, s);
  add_out(gengraph, s);

  auto* precompute = app.add_subcommand("precompute", "compute and cache node statistics");
  add_graph(precompute, s);
  add_out(precompute, s, true);

  auto* gendata = app.add_subcommand("gendata", "sample and label a training dataset");
  GenDataArgs gd;
  add_graph(gendata, s);
  gendata->add_option("--stats", s.stats, "stats cache (created when missing)");
  gendata->add_option("--count", gd.count)->capture_default_str();
  gendata->add_option("--replications", gd.replications, "Monte Carlo runs per label")->capture_default_str();
  gendata->add_option("--rho", gd.sampler.rho, "high-impact pool fraction")->capture_default_str();
  gendata->add_option("--pareto-shape", gd.sampler.pareto_shape)->capture_default_str();
  gendata->add_option("--pareto-scale", gd.sampler.pareto_scale)->capture_default_str();
  gendata->add_option("--h", s.h, "inter-relationship radius")->capture_default_str()->check(CLI::PositiveNumber);
  gendata->add_flag("!--no-features", gd.features, "skip feature vectors");
  add_seed(gendata, s);
  add_out(gendata, s, true);

  auto* train = app.add_subcommand("train", "fit the MLP surrogate");
  TrainArgs tr;
  train->add_option("--dataset", tr.dataset)->required();
  add_graph(train, s, false);
  train->add_option("--stats", s.stats);
  train->add_option("--report", tr.report, "training report (default: <out>.report.json)");
  train->add_option("--epochs", tr.config.max_epochs)->capture_default_str();
  train->add_option("--batch", tr.config.batch_size)->capture_default_str();
  train->add_option("--lr", tr.config.learning_rate)->capture_default_str();
  train->add_option("--patience", tr.config.patience)->capture_default_str();
  train->add_option("--val-fraction", tr.config.val_fraction)->capture_default_str();
  train->add_option("--hidden", tr.config.hidden, "hidden layer widths")->delimiter(',')->capture_default_str();
  add_seed(train, s);
  add_out(train, s, true);

  auto* solve = app.add_subcommand("solve", "choose true seeds with CELF");
  SolveArgs sv;
  add_graph(solve, s);
  solve->add_option("--model", s.model);
  solve->add_option("--stats", s.stats);
  solve->add_option("--sf", sv.sf, "false seeds: 1,2,3 or @file")->required();
  solve->add_option("--k", sv.k, "budget K (default |S_f|)");
  solve->add_option("--estimator", sv.estimator, "nie, mcs or exact")->capture_default_str();
  solve->add_option("--replications", sv.replications, "Monte Carlo runs inside mcs")->capture_default_str();
  solve->add_option("--eval-replications", sv.eval_replications)->capture_default_str();
  add_seed(solve, s);
  add_out(solve, s);

  auto* eval = app.add_subcommand("eval", "Monte Carlo estimate of blocked influence");
  EvalArgs ev;
  add_graph(eval, s);
  eval->add_option("--sf", ev.sf)->required();
  eval->add_option("--st", ev.st)->required();
  eval->add_option("--replications", ev.replications)->capture_default_str();
  add_seed(eval, s);
  add_out(eval, s);

  auto* oracle = app.add_subcommand("oracle", "exact blocked influence on tiny graphs");
  OracleArgs orc;
  add_graph(oracle, s);
  oracle->add_option("--sf", orc.sf)->required();
  oracle->add_option("--st", orc.st)->required();
  add_out(oracle, s);

  auto* bench = app.add_subcommand("bench", "compare NIE-CELF and MCS-CELF");
  BenchArgs bn;
  add_graph(bench, s);
  bench->add_option("--model", s.model);
  bench->add_option("--stats", s.stats);
  bench->add_option("--protocol", bn.protocol, "budget or time")->capture_default_str();
  bench->add_option("--methods", bn.methods)->capture_default_str();
  bench->add_option("--sf", bn.sf, "a single problem; otherwise --problems are sampled");
  bench->add_option("--problems", bn.problems)->capture_default_str();
  bench->add_option("--budget", bn.budget, "solve budget or timeout in seconds")->capture_default_str();
  bench->add_option("--target", bn.target, "explicit target quality (time protocol)");
  bench->add_option("--mcs-replications", bn.mcs_replications)->capture_default_str();
  bench->add_option("--eval-replications", bn.eval_replications)->capture_default_str();
  bench->add_option("--training-seconds", bn.training_seconds, "reported offline training time");
  bench->add_option("--rho", bn.sampler.rho)->capture_default_str();
  add_seed(bench, s);
  add_out(bench, s);

  CLI11_PARSE(app, argc, argv);

  try {
    nie::set_thread_count(s.threads);
    if (gengraph->parsed()) cmd_gengraph(s, gg);
    if (precompute->parsed()) cmd_precompute(s);
    if (gendata->parsed()) cmd_gendata(s, gd);
    if (train->parsed()) cmd_train(s, tr);
    if (solve->parsed()) cmd_solve(s, sv);
    if (eval->parsed()) cmd_eval(s, ev);
    if (oracle->parsed()) cmd_oracle(s, orc);
    if (bench->parsed()) cmd_bench(s, bn);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
