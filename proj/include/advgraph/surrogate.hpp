#pragma once

// Linearized two-layer GCN surrogate: the target's row of Â²C, with Â the symmetrically
// normalized adjacency with self-loops and C a fixed N x K class-score matrix.
// Degrees here are always self-loop augmented (D + 1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "advgraph/error.hpp"
#include "advgraph/graph.hpp"

namespace advgraph {

/// Dense N x K score matrix, row-major.
class ClassScoreMatrix {
 public:
  ClassScoreMatrix() = default;
  ClassScoreMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// One-hot label indicator rows, standing in for the surrogate's XW.
template <LabeledGraphView G>
ClassScoreMatrix class_scores_from_labels(const G& g) {
  ClassScoreMatrix c(g.node_count(), static_cast<std::size_t>(g.class_count()));
  for (NodeId j = 0; j < g.node_count(); ++j) c(j, static_cast<std::size_t>(g.label(j))) = 1.0;
  return c;
}

/// Index of the largest entry; lowest index wins ties.
inline int argmax_class(std::span<const double> row) {
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

/// max over y != y_old of row[y] - row[y_old], and the class attaining it.
struct Margin {
  double value = -std::numeric_limits<double>::infinity();
  int attack_class = -1;
};

inline Margin best_margin(std::span<const double> row, int y_old) {
  Margin m;
  for (std::size_t y = 0; y < row.size(); ++y) {
    if (static_cast<int>(y) == y_old) continue;
    const double v = row[y] - row[static_cast<std::size_t>(y_old)];
    if (v > m.value) {
      m.value = v;
      m.attack_class = static_cast<int>(y);
    }
  }
  return m;
}

inline std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> p(z.begin(), z.end());
  if (p.empty()) return p;
  const double top = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

/// Rows of Â²C through the factorization
///   [Â²C]_mu = d_mu^{-1/2} * sum_{k in N[mu]} S_k / d_k,   S_k = sum_{j in N[k]} c_j / sqrt(d_j),
/// with N[.] the closed neighborhood. Rows under a single hypothetical flip are evaluated by
/// patching the few S_k and degrees that the flip touches, without editing the graph.
/// Call refresh() after the viewed graph changes.
template <GraphView G>
class SurrogateRows {
 public:
  SurrogateRows(const G& g, const ClassScoreMatrix& c) : g_(g), c_(c), k_(c.cols()) {
    if (c.rows() != g.node_count()) throw ValidationError("class score matrix has wrong row count");
    refresh();
  }

  void refresh() {
    const std::size_t n = g_.node_count();
    inv_sqrt_.resize(n);
    for (NodeId v = 0; v < n; ++v) {
      inv_sqrt_[v] = 1.0 / std::sqrt(static_cast<double>(g_.neighbors(v).size() + 1));
    }
    s_.assign(n * k_, 0.0);
    for (NodeId v = 0; v < n; ++v) {
      double* sv = &s_[v * k_];
      add_scaled(sv, v, inv_sqrt_[v]);
      for (NodeId j : g_.neighbors(v)) add_scaled(sv, j, inv_sqrt_[j]);
    }
  }

  std::size_t class_count() const noexcept { return k_; }

  std::vector<double> row(NodeId mu) const {
    std::vector<double> r(k_, 0.0);
    accumulate_closed(r, mu);
    for (NodeId k : g_.neighbors(mu)) accumulate_closed(r, k);
    for (double& x : r) x *= inv_sqrt_[mu];
    return r;
  }

  /// Row `mu` of Â²C after toggling edge (u, v).
  std::vector<double> row_after_flip(NodeId mu, NodeId u, NodeId v) const {
    const bool present = g_.has_edge(u, v);
    const Flip f{u, v, present};
    std::vector<double> r(k_, 0.0);
    std::vector<double> sk(k_);

    auto visit = [&](NodeId k) {
      patched_s(f, k, sk);
      const double inv_d = 1.0 / f.degree(g_, k);
      for (std::size_t y = 0; y < k_; ++y) r[y] += sk[y] * inv_d;
    };

    // Closed neighborhood of mu after the flip.
    const NodeId other = mu == u ? v : (mu == v ? u : mu);
    visit(mu);
    for (NodeId k : g_.neighbors(mu)) {
      if (other != mu && present && k == other) continue;
      visit(k);
    }
    if (other != mu && !present) visit(other);

    const double scale = 1.0 / std::sqrt(f.degree(g_, mu));
    for (double& x : r) x *= scale;
    return r;
  }

 private:
  struct Flip {
    NodeId u, v;
    bool present;
    bool touches(NodeId w) const { return w == u || w == v; }
    double degree(const G& g, NodeId w) const {
      double d = static_cast<double>(g.neighbors(w).size() + 1);
      if (touches(w)) d += present ? -1.0 : 1.0;
      return d;
    }
    bool is_pair(NodeId a, NodeId b) const { return (a == u && b == v) || (a == v && b == u); }
  };

  void add_scaled(double* dst, NodeId j, double w) const {
    for (std::size_t y = 0; y < k_; ++y) dst[y] += c_(j, y) * w;
  }

  void accumulate_closed(std::vector<double>& r, NodeId k) const {
    const double inv_d = inv_sqrt_[k] * inv_sqrt_[k];
    const double* sk = &s_[k * k_];
    for (std::size_t y = 0; y < k_; ++y) r[y] += sk[y] * inv_d;
  }

  bool in_closed(NodeId k, NodeId w) const { return k == w || g_.has_edge(k, w); }

  /// S_k after the flip: only the u and v terms of the sum can change.
  void patched_s(const Flip& f, NodeId k, std::vector<double>& out) const {
    std::copy_n(&s_[k * k_], k_, out.begin());
    for (NodeId w : {f.u, f.v}) {
      const bool before = in_closed(k, w);
      const bool after = f.is_pair(k, w) ? !f.present : before;
      const double old_term = before ? inv_sqrt_[w] : 0.0;
      const double new_term = after ? 1.0 / std::sqrt(f.degree(g_, w)) : 0.0;
      if (old_term == new_term) continue;
      const double delta = new_term - old_term;
      for (std::size_t y = 0; y < k_; ++y) out[y] += c_(w, y) * delta;
    }
  }

  const G& g_;
  const ClassScoreMatrix& c_;
  std::size_t k_;
  std::vector<double> inv_sqrt_;
  std::vector<double> s_;
};

template <GraphView G>
std::vector<double> surrogate_row(const G& g, const ClassScoreMatrix& c, NodeId mu) {
  detail::check_node(g.node_count(), mu, "node");
  return SurrogateRows<G>(g, c).row(mu);
}

/// argmax_y [Â²C]_{mu,y}.
template <GraphView G>
int surrogate_prediction(const G& g, const ClassScoreMatrix& c, NodeId mu) {
  return argmax_class(surrogate_row(g, c, mu));
}

/// The Nettack margin [Â²C]_{mu,y} - [Â²C]_{mu,y_old} evaluated term by term:
///   sum_j (c_jy - c_jy_old) / sqrt(d_mu d_j) * sum_{k in N[mu] ∩ N[j]} 1/d_k
/// where N[mu] ∩ N[j] = CN(mu, j) plus mu and j themselves when they are adjacent (or equal).
/// y_old is the target's label. Only j within two hops contributes.
template <LabeledGraphView G>
double nettack_objective(const G& g, const ClassScoreMatrix& c, NodeId target, int attack_class) {
  detail::check_node(g.node_count(), target, "target");
  const int y_old = g.label(target);
  if (attack_class < 0 || attack_class >= static_cast<int>(c.cols())) {
    throw ValidationError("attack class " + std::to_string(attack_class) + " out of range");
  }
  if (attack_class == y_old) throw ValidationError("attack class equals the target's own class");

  auto aug = [&](NodeId v) { return static_cast<double>(g.neighbors(v).size() + 1); };
  const double d_mu = aug(target);
  double total = 0.0;
  for (NodeId j : two_hop_ball(g, target)) {
    const double weight = c(j, static_cast<std::size_t>(attack_class)) -
                          c(j, static_cast<std::size_t>(y_old));
    if (weight == 0.0) continue;
    double inner = 0.0;
    for (NodeId k : common_neighbors(g, target, j)) inner += 1.0 / aug(k);
    if (j != target && g.has_edge(target, j)) inner += 1.0 / d_mu + 1.0 / aug(j);
    if (j == target) inner += 1.0 / d_mu;
    total += weight / std::sqrt(d_mu * aug(j)) * inner;
  }
  return total;
}

/// (softmax(row) - e_y*) · Δrow, with Δrow the exact change of the target's Â²C row when edge
/// (u, v) is toggled and y* the target's label. Positive means the flip raises the target's
/// cross-entropy loss.
template <LabeledGraphView G>
double meta_gradient_proxy(const G& g, const ClassScoreMatrix& c, NodeId target, NodeId u,
                           NodeId v) {
  detail::check_node(g.node_count(), target, "target");
  detail::check_node(g.node_count(), u, "node");
  detail::check_node(g.node_count(), v, "node");
  if (u == v) throw ValidationError("meta gradient proxy needs two distinct endpoints");
  // Row `target` of Â² only reads degrees and edges within two hops of it.
  const auto dist = bfs_distances(g, target, 2);
  if (dist[u] < 0 && dist[v] < 0) return 0.0;
  SurrogateRows<G> rows(g, c);
  const auto before = rows.row(target);
  const auto after = rows.row_after_flip(target, u, v);
  auto grad = softmax(before);
  grad[static_cast<std::size_t>(g.label(target))] -= 1.0;
  double s = 0.0;
  for (std::size_t y = 0; y < grad.size(); ++y) s += grad[y] * (after[y] - before[y]);
  return s;
}

}  // namespace advgraph
