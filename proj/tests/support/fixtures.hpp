#pragma once

#include <cstddef>
#include <random>
#include <utility>
#include <vector>

#include "advgraph/graph.hpp"

namespace fixtures {

using advgraph::Edge;
using advgraph::Graph;
using advgraph::NodeId;

inline Graph make(std::size_t n, std::vector<Edge> edges, std::vector<int> labels = {}, int classes = 2) {
  if (labels.empty()) labels.assign(n, 0);
  return Graph(n, edges, std::move(labels), classes);
}

inline Graph path(std::size_t n, std::vector<int> labels = {}, int classes = 2) {
  std::vector<Edge> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make(n, e, std::move(labels), classes);
}

inline Graph star(std::size_t leaves) {
  std::vector<Edge> e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make(leaves + 1, e);
}

inline Graph triangle() { return make(3, {{0, 1}, {1, 2}, {0, 2}}); }

struct RandomGraph {
  std::size_t n;
  std::vector<Edge> edges;
  std::vector<int> labels;
  int classes;
  Graph graph;
};

/// G(n, p) with uniform random labels over `classes`.
inline RandomGraph random_graph(std::size_t n, double p, int classes, std::mt19937_64& rng) {
  std::vector<Edge> e;
  std::bernoulli_distribution coin(p);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (coin(rng)) e.emplace_back(u, v);
    }
  }
  std::uniform_int_distribution<int> lab(0, classes - 1);
  std::vector<int> labels(n);
  for (int& y : labels) y = lab(rng);
  Graph g(n, e, labels, classes);
  return {n, std::move(e), std::move(labels), classes, std::move(g)};
}

}  // namespace fixtures
