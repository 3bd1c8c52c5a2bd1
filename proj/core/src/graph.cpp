#include "nie/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
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
#include "nie/rng.hpp"

namespace nie {

Graph::Graph(NodeId node_count, std::vector<Edge> edges, bool explicit_probabilities,
             std::vector<std::int64_t> labels)
    : node_count_(node_count), explicit_probabilities_(explicit_probabilities) {
  if (node_count == 0) throw InvalidInput("graph has no nodes");
  if (labels.empty()) {
    labels.resize(node_count);
    std::iota(labels.begin(), labels.end(), std::int64_t{0});
  }
  if (labels.size() != node_count) throw InvalidInput("label count does not match node count");
  labels_ = std::move(labels);
  label_index_.reserve(node_count);
  for (NodeId v = 0; v < node_count; ++v) {
    if (!label_index_.emplace(labels_[v], v).second) {
      throw InvalidInput("duplicate node label " + std::to_string(labels_[v]));
    }
  }

  for (const Edge& e : edges) {
    if (e.source >= node_count || e.target >= node_count) {
      throw InvalidInput("edge (" + std::to_string(e.source) + "," + std::to_string(e.target) +
                         ") references a node outside [0," + std::to_string(node_count) + ")");
    }
    if (e.source == e.target) throw InvalidInput("self-loop on node " + std::to_string(e.source));
    if (!(e.probability > 0.0 && e.probability <= 1.0)) {
      throw InvalidInput("edge probability outside (0,1]");
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].source == edges[i - 1].source && edges[i].target == edges[i - 1].target) {
      throw InvalidInput("duplicate edge (" + std::to_string(edges[i].source) + "," +
                         std::to_string(edges[i].target) + ")");
    }
  }

  const std::size_t m = edges.size();
  out_offsets_.assign(node_count + 1, 0);
  in_offsets_.assign(node_count + 1, 0);
  for (const Edge& e : edges) {
    ++out_offsets_[e.source + 1];
    ++in_offsets_[e.target + 1];
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());

  targets_.resize(m);
  out_probs_.resize(m);
  sources_.resize(m);
  in_probs_.resize(m);
  std::vector<EdgeId> fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (std::size_t i = 0; i < m; ++i) {
    targets_[i] = edges[i].target;
    out_probs_[i] = edges[i].probability;
    // Edges are visited in source order, so each in-list ends up sorted.
    const EdgeId slot = fill[edges[i].target]++;
    sources_[slot] = edges[i].source;
    in_probs_[slot] = edges[i].probability;
  }

  Fnv1a hash;
  hash.update_value(static_cast<std::uint64_t>(node_count));
  hash.update_value(static_cast<std::uint64_t>(m));
  for (std::int64_t label : labels_) hash.update_value(label);
  for (const Edge& e : edges) {
    hash.update_value(e.source);
    hash.update_value(e.target);
    hash.update_value(std::bit_cast<std::uint64_t>(e.probability));
  }
  fingerprint_ = hash.hex();
}

std::optional<EdgeId> Graph::find_edge(NodeId u, NodeId v) const {
  if (!valid_node(u) || !valid_node(v)) return std::nullopt;
  const auto succ = successors(u);
  const auto it = std::lower_bound(succ.begin(), succ.end(), v);
  if (it == succ.end() || *it != v) return std::nullopt;
  return first_out_edge(u) + static_cast<EdgeId>(it - succ.begin());
}

std::optional<double> Graph::probability(NodeId u, NodeId v) const {
  const auto e = find_edge(u, v);
  if (!e) return std::nullopt;
  return out_probs_[*e];
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < node_count_; ++u) {
    for (EdgeId e = out_offsets_[u]; e < out_offsets_[u + 1]; ++e) {
      out.push_back({u, targets_[e], out_probs_[e]});
    }
  }
  return out;
}

std::optional<NodeId> Graph::node_with_label(std::int64_t label) const {
  const auto it = label_index_.find(label);
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

namespace {

struct RawEdge {
  std::int64_t u;
  std::int64_t v;
  std::optional<double> p;
};

bool parse_int(std::string_view token, std::int64_t& value) {
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

bool parse_double(std::string_view token, double& value) {
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

}  // namespace

LoadResult load_edge_list(std::istream& in, HeaderMode header_mode) {
  std::vector<RawEdge> raw;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  std::optional<bool> with_probabilities;

  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    const bool first_data = !seen_data;
    seen_data = true;

    RawEdge edge{};
    bool ok = (tokens.size() == 2 || tokens.size() == 3) && parse_int(tokens[0], edge.u) &&
              parse_int(tokens[1], edge.v);
    if (ok && tokens.size() == 3) {
      double p = 0.0;
      ok = parse_double(tokens[2], p);
      if (ok) edge.p = p;
    }
    if (!ok) {
      if (first_data && header_mode == HeaderMode::kAuto) continue;
      throw ParseError(line_no, "expected \"u v\" or \"u v p\", got \"" + line + "\"");
    }
    if (edge.u < 0 || edge.v < 0) throw ParseError(line_no, "node ids must be non-negative");
    if (edge.p && !(*edge.p > 0.0 && *edge.p <= 1.0)) {
      throw ParseError(line_no, "probability must lie in (0,1]");
    }
    const bool has_p = edge.p.has_value();
    if (with_probabilities && *with_probabilities != has_p) {
      throw ParseError(line_no, "mixes lines with and without a probability column");
    }
    with_probabilities = has_p;
    raw.push_back(edge);
  }
  if (raw.empty()) throw InvalidInput("edge list contains no edges");

  std::vector<std::int64_t> labels;
  labels.reserve(raw.size() * 2);
  for (const RawEdge& e : raw) {
    labels.push_back(e.u);
    labels.push_back(e.v);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.size() > std::numeric_limits<NodeId>::max()) throw InvalidInput("too many nodes");
  const auto compact = [&](std::int64_t label) {
    return static_cast<NodeId>(std::lower_bound(labels.begin(), labels.end(), label) -
                               labels.begin());
  };

  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(raw.size());
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const RawEdge& e : raw) {
    if (e.u == e.v) {
      ++self_loops;
      continue;
    }
    const NodeId u = compact(e.u);
    const NodeId v = compact(e.v);
    if (!seen.insert((static_cast<std::uint64_t>(u) << 32) | v).second) {
      ++duplicates;
      continue;
    }
    edges.push_back({u, v, e.p.value_or(1.0)});
  }
  // A file of only self-loops still names nodes, but carries no usable edges.
  if (edges.empty()) throw InvalidInput("edge list contains no edges after dropping self-loops");

  const auto n = static_cast<NodeId>(labels.size());
  return LoadResult{Graph(n, std::move(edges), with_probabilities.value_or(false), std::move(labels)),
                    self_loops, duplicates};
}

LoadResult load_edge_list_file(const std::filesystem::path& path, HeaderMode header_mode) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file " + path.string());
  return load_edge_list(in, header_mode);
}

void write_edge_list(std::ostream& out, const Graph& graph) {
  std::ostringstream buf;
  buf.precision(17);
  for (const Edge& e : graph.edges()) {
    buf << graph.label(e.source) << ' ' << graph.label(e.target);
    if (graph.explicit_probabilities()) buf << ' ' << e.probability;
    buf << '\n';
  }
  out << buf.str();
}

Graph assign_degree_probabilities(const Graph& graph) {
  std::vector<Edge> edges = graph.edges();
  for (Edge& e : edges) e.probability = 1.0 / static_cast<double>(graph.in_degree(e.target));
  std::vector<std::int64_t> labels(graph.node_count());
  for (NodeId v = 0; v < graph.node_count(); ++v) labels[v] = graph.label(v);
  return Graph(graph.node_count(), std::move(edges), true, std::move(labels));
}

// ---------------------------------------------------------------------------
// Node statistics

namespace {

struct BfsScratch {
  explicit BfsScratch(NodeId n) : dist(n, kUnseen), queue(n) {}
  static constexpr std::uint32_t kUnseen = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> dist;
  std::vector<NodeId> queue;
};

/// Full BFS from `source`; calls visit(node, distance) for every reached
/// node other than the source. Follows predecessors when `reverse`.
template <typename Visit>
void full_bfs(const Graph& g, NodeId source, bool reverse, BfsScratch& s, Visit&& visit) {
  std::size_t head = 0;
  std::size_t tail = 0;
  s.queue[tail++] = source;
  s.dist[source] = 0;
  while (head < tail) {
    const NodeId u = s.queue[head++];
    const std::uint32_t du = s.dist[u];
    const auto next = reverse ? g.predecessors(u) : g.successors(u);
    for (NodeId w : next) {
      if (s.dist[w] != BfsScratch::kUnseen) continue;
      s.dist[w] = du + 1;
      s.queue[tail++] = w;
      visit(w, du + 1);
    }
  }
  for (std::size_t i = 0; i < tail; ++i) s.dist[s.queue[i]] = BfsScratch::kUnseen;
}

double closeness_ratio(std::uint64_t reached, std::uint64_t distance_sum) {
  return reached == 0 ? 0.0 : static_cast<double>(reached) / static_cast<double>(distance_sum);
}

std::vector<double> exact_closeness(const Graph& g) {
  const NodeId n = g.node_count();
  std::vector<double> closeness(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    BfsScratch scratch(n);
    for (std::size_t i = begin; i < end; ++i) {
      std::uint64_t reached = 0;
      std::uint64_t sum = 0;
      full_bfs(g, static_cast<NodeId>(i), false, scratch, [&](NodeId, std::uint32_t d) {
        ++reached;
        sum += d;
      });
      closeness[i] = closeness_ratio(reached, sum);
    }
  });
  return closeness;
}

std::vector<double> sampled_closeness(const Graph& g, std::int64_t k, std::uint64_t seed) {
  const NodeId n = g.node_count();
  const auto samples = static_cast<NodeId>(std::min<std::int64_t>(k, n));
  // Partial Fisher-Yates picks `samples` distinct sources.
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  Rng rng(seed);
  for (NodeId i = 0; i < samples; ++i) {
    const auto j = i + static_cast<NodeId>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(samples);

  // Reverse BFS from a sampled target j yields d(i, j) for every i reaching j.
  // Integer accumulators keep the result independent of thread scheduling.
  std::vector<std::uint64_t> reached(n, 0);
  std::vector<std::uint64_t> sums(n, 0);
  std::mutex merge;
  parallel_for(samples, [&](std::size_t begin, std::size_t end) {
    BfsScratch scratch(n);
    std::vector<std::uint64_t> local_reached(n, 0);
    std::vector<std::uint64_t> local_sums(n, 0);
    for (std::size_t s = begin; s < end; ++s) {
      full_bfs(g, pool[s], true, scratch, [&](NodeId i, std::uint32_t d) {
        ++local_reached[i];
        local_sums[i] += d;
      });
    }
    std::lock_guard lock(merge);
    for (NodeId i = 0; i < n; ++i) {
      reached[i] += local_reached[i];
      sums[i] += local_sums[i];
    }
  });

  std::vector<double> closeness(n, 0.0);
  for (NodeId i = 0; i < n; ++i) closeness[i] = closeness_ratio(reached[i], sums[i]);
  return closeness;
}

std::vector<double> clustering_coefficients(const Graph& g) {
  const NodeId n = g.node_count();
  // Symmetrized adjacency W = A + A^T; entries are 1 or 2 (reciprocal pair).
  std::vector<std::vector<std::pair<NodeId, std::uint32_t>>> sym(n);
  for (NodeId u = 0; u < n; ++u) {
    const auto succ = g.successors(u);
    const auto pred = g.predecessors(u);
    auto& row = sym[u];
    row.reserve(succ.size() + pred.size());
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < succ.size() || j < pred.size()) {
      if (j == pred.size() || (i < succ.size() && succ[i] < pred[j])) {
        row.emplace_back(succ[i++], 1);
      } else if (i == succ.size() || pred[j] < succ[i]) {
        row.emplace_back(pred[j++], 1);
      } else {
        row.emplace_back(succ[i], 2);
        ++i;
        ++j;
      }
    }
  }

  std::vector<double> clustering(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> weight_to_i(n, 0);
    for (std::size_t idx = begin; idx < end; ++idx) {
      const auto i = static_cast<NodeId>(idx);
      const std::uint64_t deg_tot = g.in_degree(i) + g.out_degree(i);
      std::uint64_t reciprocal = 0;
      for (const auto& [k, w] : sym[i]) {
        weight_to_i[k] = w;
        if (w == 2) ++reciprocal;
      }
      // (W^3)_ii = sum_{j,k} W_ij W_jk W_ki
      std::uint64_t closed_walks = 0;
      for (const auto& [j, wij] : sym[i]) {
        for (const auto& [k, wjk] : sym[j]) closed_walks += std::uint64_t{wij} * wjk * weight_to_i[k];
      }
      for (const auto& [k, w] : sym[i]) weight_to_i[k] = 0;

      const auto denominator = static_cast<std::int64_t>(2 * deg_tot * (deg_tot > 0 ? deg_tot - 1 : 0)) -
                               static_cast<std::int64_t>(2 * reciprocal);
      if (deg_tot <= 1 || denominator <= 0) continue;
      const double triangles = static_cast<double>(closed_walks) / 2.0;
      clustering[idx] = triangles / static_cast<double>(denominator);
    }
  });
  return clustering;
}

}  // namespace

NodeStats compute_node_stats(const Graph& graph, ClosenessMode mode) {
  NodeStats stats;
  if (mode.kind == ClosenessMode::Kind::kSampled) {
    if (mode.samples <= 0) throw InvalidParameter("sampled closeness needs k > 0");
    stats.closeness = sampled_closeness(graph, mode.samples, mode.seed);
  } else {
    stats.closeness = exact_closeness(graph);
  }
  stats.clustering = clustering_coefficients(graph);
  stats.in_degree.resize(graph.node_count());
  stats.out_degree.resize(graph.node_count());
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    stats.in_degree[v] = graph.in_degree(v);
    stats.out_degree[v] = graph.out_degree(v);
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Truncated BFS

HopDistances::HopDistances(NodeId node_count) : stamp_(node_count, 0), dist_(node_count, 0) {
  order_.reserve(node_count);
}

void HopDistances::run(const Graph& graph, std::span<const NodeId> sources,
                       std::uint32_t depth_limit) {
  if (sources.empty()) throw InvalidParameter("BFS needs at least one source");
  if (stamp_.size() != graph.node_count()) {
    throw InvalidParameter("BFS workspace sized for a different graph");
  }
  for (NodeId s : sources) {
    if (!graph.valid_node(s)) throw InvalidInput("invalid node id " + std::to_string(s));
  }
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  order_.clear();
  for (NodeId s : sources) {
    if (stamp_[s] == epoch_) continue;
    stamp_[s] = epoch_;
    dist_[s] = 0;
    order_.push_back(s);
  }
  for (std::size_t head = 0; head < order_.size(); ++head) {
    const NodeId u = order_[head];
    const std::uint32_t du = dist_[u];
    if (du >= depth_limit) break;
    for (NodeId w : graph.successors(u)) {
      if (stamp_[w] == epoch_) continue;
      stamp_[w] = epoch_;
      dist_[w] = du + 1;
      order_.push_back(w);
    }
  }
}

std::unordered_map<NodeId, std::uint32_t> multi_source_bfs(const Graph& graph,
                                                           std::span<const NodeId> sources,
                                                           std::uint32_t depth_limit) {
  HopDistances bfs(graph.node_count());
  bfs.run(graph, sources, depth_limit);
  std::unordered_map<NodeId, std::uint32_t> out;
  out.reserve(bfs.visited().size());
  for (NodeId v : bfs.visited()) out.emplace(v, *bfs.distance(v));
  return out;
}

// ---------------------------------------------------------------------------
// Stats cache

void save_stats_cache(const std::filesystem::path& path, const NodeStats& stats,
                      const std::string& fingerprint) {
  nlohmann::json j;
  j["format_version"] = kStatsCacheVersion;
  j["graph_fingerprint"] = fingerprint;
  j["closeness"] = stats.closeness;
  j["clustering"] = stats.clustering;
  j["in_degree"] = stats.in_degree;
  j["out_degree"] = stats.out_degree;
  write_file_atomic(path, j.dump());
}

NodeStats load_stats_cache(const std::filesystem::path& path, const std::string& fingerprint) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("corrupt stats cache: ") + e.what());
  }
  NodeStats stats;
  try {
    if (j.at("format_version").get<int>() != kStatsCacheVersion) {
      throw VersionMismatch("stats cache version " + j.at("format_version").dump() +
                            " is not supported");
    }
    if (j.at("graph_fingerprint").get<std::string>() != fingerprint) {
      throw FingerprintMismatch("stats cache belongs to graph " +
                                j.at("graph_fingerprint").get<std::string>());
    }
    j.at("closeness").get_to(stats.closeness);
    j.at("clustering").get_to(stats.clustering);
    j.at("in_degree").get_to(stats.in_degree);
    j.at("out_degree").get_to(stats.out_degree);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed stats cache: ") + e.what());
  }
  const std::size_t n = stats.closeness.size();
  if (stats.clustering.size() != n || stats.in_degree.size() != n || stats.out_degree.size() != n) {
    throw ParseError("stats cache arrays disagree in length");
  }
  return stats;
}

}  // namespace nie
