#pragma once

#include <algorithm>
#include <cassert>
#include <charconv>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <ranges>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "advgraph/error.hpp"

namespace advgraph {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

/// Read-only adjacency interface shared by Graph, EditableGraph and ego-subgraphs.
/// Neighbor ranges are sorted ascending.
template <class G>
concept GraphView = requires(const G& g, NodeId v) {
  { g.node_count() } -> std::convertible_to<std::size_t>;
  { g.neighbors(v) } -> std::ranges::random_access_range;
  { g.has_edge(v, v) } -> std::convertible_to<bool>;
};

/// Graph plus node classes; what the attack and surrogate code needs.
template <class G>
concept LabeledGraphView = GraphView<G> && requires(const G& g, NodeId v) {
  { g.label(v) } -> std::convertible_to<int>;
  { g.class_count() } -> std::convertible_to<int>;
};

namespace detail {

using AdjacencyLists = std::vector<std::vector<NodeId>>;

inline bool sorted_contains(const std::vector<NodeId>& list, NodeId v) {
  return std::binary_search(list.begin(), list.end(), v);
}

inline void check_node(std::size_t n, NodeId v, const char* what) {
  if (v >= n) {
    throw std::out_of_range(std::string(what) + " " + std::to_string(v) +
                            " out of range for graph with " + std::to_string(n) + " nodes");
  }
}

}  // namespace detail

class EditableGraph;

/// Undirected simple graph with one class label per node. Immutable once built.
class Graph {
 public:
  Graph() = default;

  /// Self-loops and duplicate (or reversed) edges are dropped.
  Graph(std::size_t node_count, std::span<const Edge> edges, std::vector<int> labels,
        int class_count)
      : adj_(node_count), labels_(std::move(labels)), class_count_(class_count) {
    if (labels_.size() != node_count) {
      throw ValidationError("expected " + std::to_string(node_count) + " labels, got " +
                            std::to_string(labels_.size()));
    }
    if (class_count_ < 2) throw ValidationError("class_count must be at least 2");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] < 0 || labels_[i] >= class_count_) {
        throw ValidationError("label " + std::to_string(labels_[i]) + " of node " +
                              std::to_string(i) + " outside [0, " +
                              std::to_string(class_count_) + ")");
      }
    }
    for (auto [u, v] : edges) {
      detail::check_node(node_count, u, "edge endpoint");
      detail::check_node(node_count, v, "edge endpoint");
      if (u == v) continue;
      adj_[u].push_back(v);
      adj_[v].push_back(u);
    }
    for (auto& list : adj_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      edge_count_ += list.size();
    }
    edge_count_ /= 2;
    original_ids_.resize(node_count);
    for (std::size_t i = 0; i < node_count; ++i) original_ids_[i] = static_cast<std::int64_t>(i);
  }

  std::size_t node_count() const noexcept { return adj_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  int class_count() const noexcept { return class_count_; }

  int label(NodeId v) const { return labels_[v]; }
  std::span<const int> labels() const noexcept { return labels_; }

  const std::vector<NodeId>& neighbors(NodeId v) const {
    assert(v < adj_.size());
    return adj_[v];
  }

  std::size_t degree(NodeId v) const {
    detail::check_node(adj_.size(), v, "node");
    return adj_[v].size();
  }

  bool has_edge(NodeId u, NodeId v) const {
    return u < adj_.size() && detail::sorted_contains(adj_[u], v);
  }

  /// All edges as (u, v) with u < v, sorted.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId u = 0; u < adj_.size(); ++u) {
      for (NodeId v : adj_[u]) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  /// Id of each node in the files it was loaded from (identity for built graphs).
  std::span<const std::int64_t> original_ids() const noexcept { return original_ids_; }

  void set_original_ids(std::vector<std::int64_t> ids) {
    if (ids.size() != adj_.size()) throw ValidationError("original id table size mismatch");
    original_ids_ = std::move(ids);
  }

 private:
  friend class EditableGraph;

  detail::AdjacencyLists adj_;
  std::vector<int> labels_;
  std::vector<std::int64_t> original_ids_;
  std::size_t edge_count_ = 0;
  int class_count_ = 2;
};

/// Same adjacency and labels; original ids are bookkeeping and ignored.
inline bool adjacency_equal(const Graph& a, const Graph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  for (NodeId v = 0; v < a.node_count(); ++v) {
    if (a.neighbors(v) != b.neighbors(v)) return false;
  }
  return true;
}

inline bool operator==(const Graph& a, const Graph& b) {
  return adjacency_equal(a, b) && a.class_count() == b.class_count() &&
         std::ranges::equal(a.labels(), b.labels());
}

enum class FlipAction { add, remove };

inline std::string_view to_string(FlipAction a) { return a == FlipAction::add ? "add" : "delete"; }

/// One edge toggle. Endpoints are stored as given; `key()` is the unordered pair.
struct EdgeFlip {
  NodeId u = 0;
  NodeId v = 0;
  FlipAction action = FlipAction::add;

  Edge key() const { return u < v ? Edge{u, v} : Edge{v, u}; }
  EdgeFlip inverted() const {
    return {u, v, action == FlipAction::add ? FlipAction::remove : FlipAction::add};
  }
  friend bool operator==(const EdgeFlip&, const EdgeFlip&) = default;
};

/// Private mutable working copy used by the attack loops.
class EditableGraph {
 public:
  explicit EditableGraph(const Graph& g)
      : adj_(g.adj_),
        labels_(g.labels_),
        original_ids_(g.original_ids_),
        edge_count_(g.edge_count_),
        class_count_(g.class_count_) {}

  std::size_t node_count() const noexcept { return adj_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  int class_count() const noexcept { return class_count_; }
  int label(NodeId v) const { return labels_[v]; }
  std::span<const int> labels() const noexcept { return labels_; }
  const std::vector<NodeId>& neighbors(NodeId v) const { return adj_[v]; }
  std::size_t degree(NodeId v) const { return adj_[v].size(); }
  bool has_edge(NodeId u, NodeId v) const {
    return u < adj_.size() && detail::sorted_contains(adj_[u], v);
  }

  /// Applies one flip; throws InvalidFlipError tagged with `index` when it does not fit.
  void apply(const EdgeFlip& f, std::size_t index = 0) {
    const std::size_t n = adj_.size();
    if (f.u >= n || f.v >= n) throw InvalidFlipError("endpoint out of range", index);
    if (f.u == f.v) throw InvalidFlipError("self-loop flip", index);
    const bool present = has_edge(f.u, f.v);
    if (f.action == FlipAction::add && present) {
      throw InvalidFlipError("edge (" + std::to_string(f.u) + "," + std::to_string(f.v) +
                                 ") already present",
                             index);
    }
    if (f.action == FlipAction::remove && !present) {
      throw InvalidFlipError("edge (" + std::to_string(f.u) + "," + std::to_string(f.v) +
                                 ") not present",
                             index);
    }
    toggle(f.u, f.v);
  }

  /// Adds the edge if absent, removes it otherwise. Returns true if it now exists.
  bool toggle(NodeId u, NodeId v) {
    auto& lu = adj_[u];
    auto& lv = adj_[v];
    auto iu = std::lower_bound(lu.begin(), lu.end(), v);
    if (iu != lu.end() && *iu == v) {
      lu.erase(iu);
      lv.erase(std::lower_bound(lv.begin(), lv.end(), u));
      --edge_count_;
      return false;
    }
    lu.insert(iu, v);
    lv.insert(std::lower_bound(lv.begin(), lv.end(), u), u);
    ++edge_count_;
    return true;
  }

  Graph freeze() const {
    Graph g;
    g.adj_ = adj_;
    g.labels_ = labels_;
    g.original_ids_ = original_ids_;
    g.edge_count_ = edge_count_;
    g.class_count_ = class_count_;
    return g;
  }

 private:
  detail::AdjacencyLists adj_;
  std::vector<int> labels_;
  std::vector<std::int64_t> original_ids_;
  std::size_t edge_count_ = 0;
  int class_count_ = 2;
};

/// Returns a new graph with `flips` applied in order. The input is left untouched.
inline Graph apply_flips(const Graph& g, std::span<const EdgeFlip> flips) {
  EditableGraph work(g);
  for (std::size_t i = 0; i < flips.size(); ++i) work.apply(flips[i], i);
  return work.freeze();
}

inline std::size_t degree(const Graph& g, NodeId v) { return g.degree(v); }

/// {k : k ~ u and k ~ v}. For u == v this is the neighbor set of u.
template <GraphView G>
std::vector<NodeId> common_neighbors(const G& g, NodeId u, NodeId v) {
  detail::check_node(g.node_count(), u, "node");
  detail::check_node(g.node_count(), v, "node");
  const auto& nu = g.neighbors(u);
  if (u == v) return {nu.begin(), nu.end()};
  const auto& nv = g.neighbors(v);
  std::vector<NodeId> out;
  std::ranges::set_intersection(nu, nv, std::back_inserter(out));
  return out;
}

/// Hop distances from `source`; -1 marks unreachable nodes. Stops expanding past `max_depth`
/// when it is non-negative.
template <GraphView G>
std::vector<int> bfs_distances(const G& g, NodeId source, int max_depth = -1) {
  std::vector<int> dist(g.node_count(), -1);
  std::queue<NodeId> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop();
    if (max_depth >= 0 && dist[u] >= max_depth) continue;
    for (NodeId w : g.neighbors(u)) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        frontier.push(w);
      }
    }
  }
  return dist;
}

/// Nodes within two hops of `center` (center included), sorted.
template <GraphView G>
std::vector<NodeId> two_hop_ball(const G& g, NodeId center) {
  std::vector<NodeId> ball{center};
  for (NodeId k : g.neighbors(center)) {
    ball.push_back(k);
    for (NodeId j : g.neighbors(k)) ball.push_back(j);
  }
  std::sort(ball.begin(), ball.end());
  ball.erase(std::unique(ball.begin(), ball.end()), ball.end());
  return ball;
}

inline constexpr int kEgoRadius = 2;

/// Induced subgraph on a node and everything within two hops of it.
struct EgoSubgraph {
  NodeId center = 0;            ///< id in the parent graph
  std::vector<NodeId> members;  ///< parent ids, sorted; local id i is members[i]
  Graph induced;                ///< local ids, labels copied from the parent

  NodeId local_center() const {
    return static_cast<NodeId>(std::lower_bound(members.begin(), members.end(), center) -
                               members.begin());
  }
};

template <LabeledGraphView G>
EgoSubgraph ego_subgraph(const G& g, NodeId center) {
  detail::check_node(g.node_count(), center, "center");
  EgoSubgraph sg;
  sg.center = center;
  sg.members = two_hop_ball(g, center);
  const auto& m = sg.members;
  auto local = [&](NodeId v) {
    return static_cast<NodeId>(std::lower_bound(m.begin(), m.end(), v) - m.begin());
  };
  std::vector<Edge> edges;
  std::vector<int> labels(m.size());
  int max_label = 1;
  for (std::size_t i = 0; i < m.size(); ++i) {
    labels[i] = g.label(m[i]);
    max_label = std::max(max_label, labels[i]);
    for (NodeId w : g.neighbors(m[i])) {
      if (w > m[i] && std::binary_search(m.begin(), m.end(), w)) edges.emplace_back(i, local(w));
    }
  }
  sg.induced = Graph(m.size(), edges, std::move(labels), std::max(g.class_count(), max_label + 1));
  std::vector<std::int64_t> ids(m.begin(), m.end());
  sg.induced.set_original_ids(std::move(ids));
  return sg;
}

// ---------------------------------------------------------------------------
// Text ingestion

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Parses "a b" (two whitespace-separated integers). Returns false for blank/comment lines.
inline bool parse_pair_line(std::string_view line, std::size_t line_no, std::int64_t& a,
                            std::int64_t& b) {
  line = trim(line);
  if (line.empty() || line.front() == '#') return false;
  std::int64_t vals[2];
  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    if (count == 2) throw ParseError("expected two integers, found extra tokens", line_no);
    const char* first = line.data() + pos;
    const char* last = line.data() + end;
    auto [ptr, ec] = std::from_chars(first, last, vals[count]);
    if (ec != std::errc() || ptr != last) {
      throw ParseError("not an integer: '" + std::string(first, last) + "'", line_no);
    }
    ++count;
    pos = end;
  }
  if (count != 2) throw ParseError("expected two integers", line_no);
  a = vals[0];
  b = vals[1];
  return true;
}

}  // namespace detail

/// Reads an edge list and a "node label" list. Ids from both files are remapped to a dense
/// 0-based range in ascending order (identity for ids that are already 0..N-1).
/// `class_count` <= 0 infers max(2, max label + 1).
inline Graph load_graph(std::istream& edge_src, std::istream& label_src, int class_count = 0) {
  std::vector<std::pair<std::int64_t, std::int64_t>> raw_edges;
  std::map<std::int64_t, int> raw_labels;
  std::vector<std::int64_t> ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(edge_src, line)) {
    ++line_no;
    std::int64_t a, b;
    if (!detail::parse_pair_line(line, line_no, a, b)) continue;
    raw_edges.emplace_back(a, b);
    ids.push_back(a);
    ids.push_back(b);
  }
  line_no = 0;
  while (std::getline(label_src, line)) {
    ++line_no;
    std::int64_t node, lab;
    if (!detail::parse_pair_line(line, line_no, node, lab)) continue;
    if (lab < 0 || (class_count > 0 && lab >= class_count)) {
      throw ValidationError("label " + std::to_string(lab) + " of node " + std::to_string(node) +
                            " out of range (line " + std::to_string(line_no) + ")");
    }
    if (lab > 1'000'000) throw ValidationError("label " + std::to_string(lab) + " implausibly large");
    auto [it, inserted] = raw_labels.emplace(node, static_cast<int>(lab));
    if (!inserted && it->second != lab) {
      throw ValidationError("conflicting labels for node " + std::to_string(node) + " (line " +
                            std::to_string(line_no) + ")");
    }
    ids.push_back(node);
  }

  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto dense = [&](std::int64_t id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  std::vector<int> labels(ids.size(), -1);
  int max_label = 0;
  for (auto [node, lab] : raw_labels) {
    labels[dense(node)] = lab;
    max_label = std::max(max_label, lab);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw ValidationError("node " + std::to_string(ids[i]) + " has no label");
  }
  std::vector<Edge> edges;
  edges.reserve(raw_edges.size());
  for (auto [a, b] : raw_edges) edges.emplace_back(dense(a), dense(b));

  const int k = class_count > 0 ? class_count : std::max(2, max_label + 1);
  Graph g(ids.size(), edges, std::move(labels), k);
  g.set_original_ids(std::move(ids));
  return g;
}

inline Graph load_graph_files(const std::string& edge_path, const std::string& label_path,
                              int class_count = 0) {
  std::ifstream edges(edge_path);
  if (!edges) throw std::runtime_error("cannot open edge file '" + edge_path + "'");
  std::ifstream labels(label_path);
  if (!labels) throw std::runtime_error("cannot open label file '" + label_path + "'");
  return load_graph(edges, labels, class_count);
}

/// Edge list in original ids, one "u v" per line with u < v in dense order.
inline void write_edge_list(const Graph& g, std::ostream& out) {
  const auto ids = g.original_ids();
  for (auto [u, v] : g.edges()) out << ids[u] << ' ' << ids[v] << '\n';
}

inline void write_labels(const Graph& g, std::ostream& out) {
  const auto ids = g.original_ids();
  for (NodeId v = 0; v < g.node_count(); ++v) out << ids[v] << ' ' << g.label(v) << '\n';
}

/// "node_id,original_id" CSV of the dense remapping.
inline void write_node_map(const Graph& g, std::ostream& out) {
  out << "node_id,original_id\n";
  const auto ids = g.original_ids();
  for (NodeId v = 0; v < g.node_count(); ++v) out << v << ',' << ids[v] << '\n';
}

}  // namespace advgraph
