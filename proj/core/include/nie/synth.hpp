#pragma once

#include <cstdint>

#include "nie/graph.hpp"

namespace nie {

struct PowerLawSpec {
  NodeId nodes = 768;
  std::size_t edges = 1532;
  /// Degree exponent of the Chung-Lu weights, w_i proportional to
  /// (i + 1)^(-1 / (exponent - 1)).
  double exponent = 2.1;
  std::uint64_t seed = 0;
};

/// Weakly connected directed graph with a heavy-tailed degree sequence: a
/// random recursive tree with random edge directions, topped up with
/// Chung-Lu edges until `edges` distinct directed edges exist. Probabilities
/// are 1 / in-degree of the target. Throws InvalidParameter when edges is
/// below nodes - 1 or above n(n-1).
Graph power_law_graph(const PowerLawSpec& spec);

}  // namespace nie
