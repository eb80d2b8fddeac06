#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <stack>
#include <string_view>
#include <vector>

#include "advgraph/graph.hpp"

namespace advgraph {

// ---------------------------------------------------------------------------
// Node-level measures. All of them are total: degenerate nodes map to 0.

template <GraphView G>
double clustering_coefficient(const G& g, NodeId i) {
  detail::check_node(g.node_count(), i, "node");
  const auto& nbrs = g.neighbors(i);
  const std::size_t d = nbrs.size();
  if (d <= 1) return 0.0;
  std::size_t links = 0;  // each neighbor-neighbor link counted twice
  for (NodeId j : nbrs) {
    const auto& nj = g.neighbors(j);
    auto a = nbrs.begin();
    auto b = nj.begin();
    while (a != nbrs.end() && b != nj.end()) {
      if (*a < *b) {
        ++a;
      } else if (*b < *a) {
        ++b;
      } else {
        ++links;
        ++a;
        ++b;
      }
    }
  }
  return static_cast<double>(links) / static_cast<double>(d * (d - 1));
}

/// Unnormalized betweenness of every node, summed over unordered pairs {s, t}.
/// Brandes accumulation; path counts kept in double to survive large graphs.
template <GraphView G>
std::vector<double> betweenness_all(const G& g) {
  const std::size_t n = g.node_count();
  std::vector<double> bc(n, 0.0);
  std::vector<double> sigma(n), delta(n);
  std::vector<int> dist(n);
  std::vector<NodeId> order;
  order.reserve(n);
  for (NodeId s = 0; s < n; ++s) {
    if (g.neighbors(s).empty()) continue;
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const NodeId v = order[head];
      for (NodeId w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          order.push_back(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    for (std::size_t idx = order.size(); idx-- > 1;) {
      const NodeId w = order[idx];
      for (NodeId v : g.neighbors(w)) {
        if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
      bc[w] += delta[w];
    }
  }
  for (double& b : bc) b *= 0.5;
  return bc;
}

template <GraphView G>
double betweenness_centrality(const G& g, NodeId i) {
  detail::check_node(g.node_count(), i, "node");
  if (g.neighbors(i).size() < 2) return 0.0;
  return betweenness_all(g)[i];
}

/// reach / sum(d) scaled by (reach - 1) / (N - 1), where reach counts i's component.
/// On a connected graph this is N / sum(d).
template <GraphView G>
double closeness_centrality(const G& g, NodeId i) {
  detail::check_node(g.node_count(), i, "node");
  const std::size_t n = g.node_count();
  if (n <= 1 || g.neighbors(i).empty()) return 0.0;
  const auto dist = bfs_distances(g, i);
  double reach = 0.0, total = 0.0;
  for (int d : dist) {
    if (d >= 0) {
      reach += 1.0;
      total += d;
    }
  }
  return reach / total * ((reach - 1.0) / static_cast<double>(n - 1));
}

template <GraphView G>
double avg_neighbor_degree(const G& g, NodeId i) {
  detail::check_node(g.node_count(), i, "node");
  const auto& nbrs = g.neighbors(i);
  if (nbrs.empty()) return 0.0;
  double sum = 0.0;
  for (NodeId j : nbrs) sum += static_cast<double>(g.neighbors(j).size());
  return sum / static_cast<double>(nbrs.size());
}

// ---------------------------------------------------------------------------
// Power iteration

struct PowerIterationOptions {
  /// Bound on the remaining max-component error, estimated from the last step size and the
  /// observed contraction ratio. A bare step-size test stops far too early when the second
  /// eigenvalue is close to the first.
  double tolerance = 1e-6;
  int max_iterations = 1000;
};

struct EigenEstimate {
  std::vector<double> vector;  ///< unit norm, nonnegative; zeros for an edgeless graph
  double value = 0.0;          ///< Rayleigh quotient x'Ax of the returned vector
  int iterations = 0;
  bool converged = false;
  bool damped = false;  ///< (Ax + x)/2 steps were used
};

/// True if some connected component with at least one edge is bipartite. Plain power
/// iteration oscillates on those, so they get the damped step.
template <GraphView G>
bool has_bipartite_component(const G& g) {
  const std::size_t n = g.node_count();
  std::vector<int> side(n, -1);
  std::vector<NodeId> queue;
  for (NodeId s = 0; s < n; ++s) {
    if (side[s] >= 0 || g.neighbors(s).empty()) continue;
    bool bipartite = true;
    side[s] = 0;
    queue.assign(1, s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId v = queue[head];
      for (NodeId w : g.neighbors(v)) {
        if (side[w] < 0) {
          side[w] = 1 - side[v];
          queue.push_back(w);
        } else if (side[w] == side[v]) {
          bipartite = false;
        }
      }
    }
    if (bipartite) return true;
  }
  return false;
}

/// Dominant adjacency eigenpair by power iteration from the all-ones vector.
template <GraphView G>
EigenEstimate dominant_eigenpair(const G& g, PowerIterationOptions opt = {}) {
  const std::size_t n = g.node_count();
  EigenEstimate est;
  est.vector.assign(n, 0.0);
  bool any_edge = false;
  for (NodeId v = 0; v < n && !any_edge; ++v) any_edge = !g.neighbors(v).empty();
  if (!any_edge) {
    est.converged = true;
    return est;
  }
  est.damped = has_bipartite_component(g);

  std::vector<double> x(n, 1.0), y(n);
  double last_change = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iterations; ++it) {
    double norm2 = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      double s = 0.0;
      for (NodeId w : g.neighbors(v)) s += x[w];
      if (est.damped) s = 0.5 * (s + x[v]);
      y[v] = s;
      norm2 += s * s;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    double change = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      y[v] *= inv;
      change = std::max(change, std::abs(y[v] - x[v]));
    }
    x.swap(y);
    est.iterations = it;
    const double ratio = change / last_change;
    last_change = change;
    const bool settled = change < 1e-14 || (ratio < 1.0 && change * ratio / (1.0 - ratio) < 0.1 * opt.tolerance);
    if (change < opt.tolerance && settled) {
      est.converged = true;
      break;
    }
  }

  double norm2 = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    if (g.neighbors(v).empty()) x[v] = 0.0;
    norm2 += x[v] * x[v];
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& xv : x) xv *= inv;

  double rayleigh = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    double s = 0.0;
    for (NodeId w : g.neighbors(v)) s += x[w];
    rayleigh += x[v] * s;
  }
  est.value = rayleigh;
  est.vector = std::move(x);
  return est;
}

template <GraphView G>
std::vector<double> eigenvector_centrality(const G& g, PowerIterationOptions opt = {}) {
  return dominant_eigenpair(g, opt).vector;
}

// ---------------------------------------------------------------------------
// The 17-attribute vector

inline constexpr std::size_t kNodeAttributeCount = 6;
inline constexpr std::size_t kSubgraphAttributeCount = 11;
inline constexpr std::size_t kAttributeCount = kNodeAttributeCount + kSubgraphAttributeCount;

/// Frozen column order. Trained forests and CSV files depend on it.
enum class Attribute : std::size_t {
  degree,
  clustering,
  betweenness,
  closeness,
  eigenvector,
  neighbor_degree,
  sg_nodes,
  sg_edges,
  sg_avg_degree,
  sg_leaf_fraction,
  sg_spectral_radius,
  sg_density,
  sg_clustering,
  sg_betweenness,
  sg_closeness,
  sg_eigenvector,
  sg_neighbor_degree,
};

inline constexpr std::array<std::string_view, kAttributeCount> kAttributeNames = {
    "D_i",  "C_i",  "BC_i", "CC_i", "EC_i", "ND_i",  "N_sg",  "E_sg",  "D_sg",
    "P_sg", "EV",   "DS",   "C_sg", "BC_sg", "CC_sg", "EC_sg", "ND_sg"};

inline constexpr bool is_subgraph_level(std::size_t index) { return index >= kNodeAttributeCount; }

inline constexpr std::string_view attribute_name(Attribute a) {
  return kAttributeNames[static_cast<std::size_t>(a)];
}

struct AttributeVector {
  std::array<double, kAttributeCount> values{};

  double& operator[](Attribute a) { return values[static_cast<std::size_t>(a)]; }
  double operator[](Attribute a) const { return values[static_cast<std::size_t>(a)]; }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  static constexpr std::size_t size() { return kAttributeCount; }
  friend bool operator==(const AttributeVector&, const AttributeVector&) = default;
};

/// The eleven subgraph-level values, in AttributeVector order.
using SubgraphAttributes = std::array<double, kSubgraphAttributeCount>;

namespace detail {

template <class T>
double mean_of(const std::vector<T>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

/// Counts, density and spectral radius of the ego-subgraph plus the per-node means of the
/// five node measures, all computed inside the induced subgraph.
inline SubgraphAttributes subgraph_attributes(const EgoSubgraph& sg) {
  const Graph& h = sg.induced;
  const std::size_t n = h.node_count();
  const double nd = static_cast<double>(n);
  const double e = static_cast<double>(h.edge_count());

  std::vector<double> cc(n), clos(n), nbr(n);
  std::size_t leaves = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (h.neighbors(v).size() == 1) ++leaves;
    cc[v] = clustering_coefficient(h, v);
    clos[v] = closeness_centrality(h, v);
    nbr[v] = avg_neighbor_degree(h, v);
  }
  const EigenEstimate eig = dominant_eigenpair(h);

  SubgraphAttributes out{};
  out[0] = nd;
  out[1] = e;
  out[2] = n > 0 ? 2.0 * e / nd : 0.0;
  out[3] = n > 0 ? static_cast<double>(leaves) / nd : 0.0;
  out[4] = eig.value;
  out[5] = n > 1 ? 2.0 * e / (nd * (nd - 1.0)) : 0.0;
  out[6] = detail::mean_of(cc);
  out[7] = detail::mean_of(betweenness_all(h));
  out[8] = detail::mean_of(clos);
  out[9] = detail::mean_of(eig.vector);
  out[10] = detail::mean_of(nbr);
  return out;
}

/// Attribute vectors for many targets of one graph; betweenness and eigenvector centrality
/// of the whole graph are computed once, on construction.
template <LabeledGraphView G>
class AttributeExtractor {
 public:
  explicit AttributeExtractor(const G& g)
      : g_(g), betweenness_(betweenness_all(g)), eigenvector_(eigenvector_centrality(g)) {}

  AttributeVector operator()(NodeId target) const {
    detail::check_node(g_.node_count(), target, "target");
    AttributeVector a;
    a[Attribute::degree] = static_cast<double>(g_.neighbors(target).size());
    a[Attribute::clustering] = clustering_coefficient(g_, target);
    a[Attribute::betweenness] = betweenness_[target];
    a[Attribute::closeness] = closeness_centrality(g_, target);
    a[Attribute::eigenvector] = eigenvector_[target];
    a[Attribute::neighbor_degree] = avg_neighbor_degree(g_, target);
    const SubgraphAttributes s = subgraph_attributes(ego_subgraph(g_, target));
    std::copy(s.begin(), s.end(), a.values.begin() + kNodeAttributeCount);
    return a;
  }

  const std::vector<double>& betweenness() const { return betweenness_; }
  const std::vector<double>& eigenvector() const { return eigenvector_; }

 private:
  const G& g_;
  std::vector<double> betweenness_;
  std::vector<double> eigenvector_;
};

/// Node-level values on the full graph, subgraph-level values on the target's ego-subgraph.
template <LabeledGraphView G>
AttributeVector attribute_vector(const G& g, NodeId target) {
  return AttributeExtractor<G>(g)(target);
}

// ---------------------------------------------------------------------------
// CSV

inline void write_attribute_header(std::ostream& out) {
  out << "node_id,label";
  for (auto name : kAttributeNames) out << ',' << name;
  out << '\n';
}

inline void write_attribute_row(std::ostream& out, std::int64_t node_id, int label,
                                const AttributeVector& a) {
  const auto old = out.precision(12);
  out << node_id << ',' << label;
  for (double v : a.values) out << ',' << v;
  out << '\n';
  out.precision(old);
}

}  // namespace advgraph
