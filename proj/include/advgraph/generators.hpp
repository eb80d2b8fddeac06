#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advgraph/error.hpp"
#include "advgraph/graph.hpp"

namespace advgraph {

enum class GraphModel { erdos_renyi, barabasi_albert };

inline std::string_view to_string(GraphModel m) {
  return m == GraphModel::erdos_renyi ? "erdos-renyi" : "barabasi-albert";
}

inline std::optional<GraphModel> parse_graph_model(std::string_view name) {
  if (name == "erdos-renyi") return GraphModel::erdos_renyi;
  if (name == "barabasi-albert") return GraphModel::barabasi_albert;
  return std::nullopt;
}

/// G(n, p) edges. Uses geometric skipping, so the cost is O(n + m).
inline std::vector<Edge> erdos_renyi_edges(std::size_t n, double p, std::mt19937_64& rng) {
  if (p < 0.0 || p > 1.0) throw ValidationError("erdos-renyi p must be in [0, 1]");
  std::vector<Edge> edges;
  if (n < 2 || p == 0.0) return edges;
  if (p == 1.0) {
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    }
    return edges;
  }
  std::geometric_distribution<std::uint64_t> skip(p);
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uint64_t idx = skip(rng);
  NodeId u = 0;
  std::uint64_t row_start = 0;  // linear index of pair (u, u + 1)
  while (idx < total) {
    while (idx >= row_start + (n - 1 - u)) {
      row_start += n - 1 - u;
      ++u;
    }
    edges.emplace_back(u, u + 1 + static_cast<NodeId>(idx - row_start));
    idx += 1 + skip(rng);
  }
  return edges;
}

/// Preferential attachment: starts from a clique on m + 1 nodes, then each new node links to
/// m distinct existing nodes chosen proportionally to degree.
inline std::vector<Edge> barabasi_albert_edges(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  if (m == 0) throw ValidationError("barabasi-albert m must be at least 1");
  if (n <= m) throw ValidationError("barabasi-albert needs more than m nodes");
  std::vector<Edge> edges;
  std::vector<NodeId> endpoints;  // node repeated once per incident edge
  for (NodeId u = 0; u <= m; ++u) {
    for (NodeId v = u + 1; v <= m; ++v) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  std::vector<NodeId> chosen;
  for (NodeId v = m + 1; v < n; ++v) {
    chosen.clear();
    std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
    while (chosen.size() < m) {
      const NodeId t = endpoints[pick(rng)];
      if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) chosen.push_back(t);
    }
    std::sort(chosen.begin(), chosen.end());
    for (NodeId t : chosen) {
      edges.emplace_back(t, v);
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return edges;
}

/// Community-like labels: `classes` distinct random seed nodes grow regions by simultaneous
/// BFS (first arrival wins, ties to the lower seed index). Nodes no seed reaches get a random
/// class. Afterwards each node independently, with probability `noise`, is relabelled uniformly
/// at random.
inline std::vector<int> block_labels(std::size_t n, std::span<const Edge> edges, int classes,
                                     std::mt19937_64& rng, double noise = 0.0) {
  if (classes < 2) throw ValidationError("need at least 2 classes");
  if (noise < 0.0 || noise > 1.0) throw ValidationError("label noise must be in [0, 1]");
  std::vector<int> labels(n, -1);
  if (n == 0) return labels;
  std::vector<std::vector<NodeId>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  std::queue<NodeId> frontier;
  for (int c = 0; c < classes && static_cast<std::size_t>(c) < n; ++c) {
    labels[nodes[static_cast<std::size_t>(c)]] = c;
    frontier.push(nodes[static_cast<std::size_t>(c)]);
  }
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : adj[u]) {
      if (labels[v] < 0) {
        labels[v] = labels[u];
        frontier.push(v);
      }
    }
  }
  std::uniform_int_distribution<int> any(0, classes - 1);
  for (int& y : labels) {
    if (y < 0) y = any(rng);
  }
  if (noise > 0.0) {
    std::bernoulli_distribution flip(noise);
    for (int& y : labels) {
      if (flip(rng)) y = any(rng);
    }
  }
  return labels;
}

struct SyntheticSpec {
  GraphModel model = GraphModel::erdos_renyi;
  std::size_t nodes = 500;
  /// Mean degree for erdos-renyi (p = parameter / (n - 1)); edges per new node for
  /// barabasi-albert.
  double parameter = 4.0;
  int classes = 4;
  double label_noise = 0.0;  ///< share of nodes relabelled at random after block assignment
  std::uint64_t seed = 0;
};

inline Graph make_synthetic_graph(const SyntheticSpec& spec) {
  if (spec.nodes < 2) throw ValidationError("synthetic graph needs at least 2 nodes");
  std::mt19937_64 rng(spec.seed);
  std::vector<Edge> edges;
  if (spec.model == GraphModel::erdos_renyi) {
    const double p = std::min(1.0, spec.parameter / static_cast<double>(spec.nodes - 1));
    edges = erdos_renyi_edges(spec.nodes, p, rng);
  } else {
    if (spec.parameter < 1.0) throw ValidationError("barabasi-albert parameter must be at least 1");
    edges = barabasi_albert_edges(spec.nodes, static_cast<std::size_t>(spec.parameter), rng);
  }
  auto labels = block_labels(spec.nodes, edges, spec.classes, rng, spec.label_noise);
  return Graph(spec.nodes, edges, std::move(labels), spec.classes);
}

}  // namespace advgraph
