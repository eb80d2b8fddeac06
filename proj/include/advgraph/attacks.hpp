#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "advgraph/error.hpp"
#include "advgraph/graph.hpp"
#include "advgraph/surrogate.hpp"

namespace advgraph {

enum class AttackKind { nettack, meta, gradargmax };

inline constexpr std::array<AttackKind, 3> kAllAttacks = {AttackKind::nettack, AttackKind::meta,
                                                          AttackKind::gradargmax};

inline std::string_view to_string(AttackKind a) {
  switch (a) {
    case AttackKind::nettack: return "nettack";
    case AttackKind::meta: return "meta";
    case AttackKind::gradargmax: return "gradargmax";
  }
  return "?";
}

inline std::optional<AttackKind> parse_attack(std::string_view name) {
  for (AttackKind a : kAllAttacks) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

/// Ordered edge flips against one target, with the score each flip had when it was chosen.
struct AttackPlan {
  AttackKind attack = AttackKind::nettack;
  NodeId target = 0;
  std::size_t budget = 1;
  std::vector<EdgeFlip> flips;
  std::vector<double> scores;

  bool empty() const noexcept { return flips.empty(); }
};

/// max(1, degree) for nettack and meta, 2 deletions for gradargmax.
template <GraphView G>
std::size_t default_budget(AttackKind a, const G& g, NodeId target) {
  if (a == AttackKind::gradargmax) return 2;
  return std::max<std::size_t>(1, g.neighbors(target).size());
}

namespace detail {

template <GraphView G>
void check_attack_args(const G& g, NodeId target, std::size_t budget) {
  check_node(g.node_count(), target, "target");
  if (budget == 0) throw ValidationError("attack budget must be positive");
}

inline Edge make_key(NodeId u, NodeId v) { return u < v ? Edge{u, v} : Edge{v, u}; }

/// Running argmax with lexicographic tie-breaking on the unordered pair.
struct BestFlip {
  double score = -std::numeric_limits<double>::infinity();
  Edge key{};
  bool found = false;

  void offer(double s, NodeId u, NodeId v) {
    const Edge k = make_key(u, v);
    if (!found || s > score || (s == score && k < key)) {
      score = s;
      key = k;
      found = true;
    }
  }
};

}  // namespace detail

/// Greedy direct attack on the surrogate margin. Each step scores every flip incident to the
/// target (add a missing edge, delete a present one) by the best wrong-class margin after the
/// flip, applies the best one, and stops once no flip improves the current margin.
inline AttackPlan attack_nettack(const Graph& g, NodeId target, std::size_t budget) {
  detail::check_attack_args(g, target, budget);
  AttackPlan plan{AttackKind::nettack, target, budget, {}, {}};
  EditableGraph work(g);
  const ClassScoreMatrix c = class_scores_from_labels(g);
  SurrogateRows<EditableGraph> rows(work, c);
  const int y_old = g.label(target);
  std::set<Edge> used;

  double current = best_margin(rows.row(target), y_old).value;
  while (plan.flips.size() < budget) {
    double best = current;
    std::optional<NodeId> pick;
    // Ascending v gives ascending pair keys, so strict '>' keeps the smallest pair on ties.
    for (NodeId v = 0; v < work.node_count(); ++v) {
      if (v == target || used.count(detail::make_key(target, v))) continue;
      const double m = best_margin(rows.row_after_flip(target, target, v), y_old).value;
      if (m > best) {
        best = m;
        pick = v;
      }
    }
    if (!pick) break;
    const EdgeFlip f{target, *pick, work.has_edge(target, *pick) ? FlipAction::remove : FlipAction::add};
    work.apply(f);
    rows.refresh();
    used.insert(f.key());
    plan.flips.push_back(f);
    plan.scores.push_back(best);
    current = best;
  }
  return plan;
}

struct MetaAttackOptions {
  /// Also consider pairs with no endpoint within two hops of the target. Their score is
  /// exactly zero, so this only matters for tie-breaking among non-improving flips.
  bool global_candidates = false;
};

/// Greedy meta-gradient attack. Each step scores candidate flips by the meta gradient proxy
/// (which already carries the add/delete sign) and applies the largest while it is positive.
/// Candidates are all pairs touching the target's two-hop ball: outside that ball a flip
/// cannot change the target's Â²C row.
inline AttackPlan attack_meta(const Graph& g, NodeId target, std::size_t budget,
                              MetaAttackOptions opt = {}) {
  detail::check_attack_args(g, target, budget);
  AttackPlan plan{AttackKind::meta, target, budget, {}, {}};
  EditableGraph work(g);
  const ClassScoreMatrix c = class_scores_from_labels(g);
  SurrogateRows<EditableGraph> rows(work, c);
  const std::size_t n = work.node_count();
  const auto y_true = static_cast<std::size_t>(g.label(target));
  std::set<Edge> used;
  auto is_used = [&](NodeId a, NodeId b) { return used.count(detail::make_key(a, b)) > 0; };

  while (plan.flips.size() < budget) {
    const auto before = rows.row(target);
    auto grad = softmax(before);
    grad[y_true] -= 1.0;
    auto proxy = [&](NodeId u, NodeId v) {
      const auto after = rows.row_after_flip(target, u, v);
      double s = 0.0;
      for (std::size_t y = 0; y < grad.size(); ++y) s += grad[y] * (after[y] - before[y]);
      return s;
    };

    const auto ball = two_hop_ball(work, target);
    std::vector<char> in_ball(n, 0);
    for (NodeId b : ball) in_ball[b] = 1;
    std::vector<NodeId> outside;
    outside.reserve(n - ball.size());
    for (NodeId v = 0; v < n; ++v) {
      if (!in_ball[v]) outside.push_back(v);
    }

    detail::BestFlip best;
    // Both endpoints in the ball.
    for (std::size_t a = 0; a < ball.size(); ++a) {
      for (std::size_t b = a + 1; b < ball.size(); ++b) {
        if (!is_used(ball[a], ball[b])) best.offer(proxy(ball[a], ball[b]), ball[a], ball[b]);
      }
    }
    // Target to any outside node: the new neighbor's own neighborhood matters.
    for (NodeId v : outside) {
      if (!is_used(target, v)) best.offer(proxy(target, v), target, v);
    }
    // Neighbor of the target to an outside node (always an addition). The score depends on
    // the outside node only through its label and degree, so one representative per
    // (label, degree) group is enough: the smallest id, which also wins lexicographic ties.
    std::map<std::pair<int, std::size_t>, std::vector<NodeId>> groups;
    for (NodeId v : outside) groups[{work.label(v), work.degree(v)}].push_back(v);
    for (NodeId u : work.neighbors(target)) {
      for (const auto& [key, members] : groups) {
        for (NodeId v : members) {
          if (is_used(u, v)) continue;
          best.offer(proxy(u, v), u, v);
          break;
        }
      }
    }
    // Two-hop node to an outside node: only the two-hop node's degree changes, so every
    // addition scores the same, and so does every deletion.
    for (NodeId u : ball) {
      if (u == target || work.has_edge(target, u)) continue;
      for (NodeId v : outside) {
        if (work.has_edge(u, v) || is_used(u, v)) continue;
        best.offer(proxy(u, v), u, v);
        break;
      }
      for (NodeId v : work.neighbors(u)) {
        if (in_ball[v] || is_used(u, v)) continue;
        best.offer(proxy(u, v), u, v);
        break;
      }
    }
    if (opt.global_candidates) {
      // Smallest unused pair entirely outside the ball; its score is exactly 0.
      for (std::size_t a = 0; a < outside.size(); ++a) {
        bool offered = false;
        for (std::size_t b = a + 1; b < outside.size(); ++b) {
          if (!is_used(outside[a], outside[b])) {
            best.offer(0.0, outside[a], outside[b]);
            offered = true;
            break;
          }
        }
        if (offered) break;
      }
    }

    if (!best.found || best.score <= 0.0) break;
    const auto [u, v] = best.key;
    const EdgeFlip f{u, v, work.has_edge(u, v) ? FlipAction::remove : FlipAction::add};
    work.apply(f);
    rows.refresh();
    used.insert(f.key());
    plan.flips.push_back(f);
    plan.scores.push_back(best.score);
  }
  return plan;
}

/// Deletes, one at a time, the edge of the target's current two-hop ego-subgraph with the
/// smallest sqrt(d_u d_v) (augmented degrees), i.e. the largest 1/sqrt(d_u d_v) gradient
/// magnitude. Recorded score is 1/sqrt(d_u d_v).
inline AttackPlan attack_gradargmax(const Graph& g, NodeId target, std::size_t budget = 2) {
  detail::check_attack_args(g, target, budget);
  AttackPlan plan{AttackKind::gradargmax, target, budget, {}, {}};
  EditableGraph work(g);
  while (plan.flips.size() < budget) {
    const auto ball = two_hop_ball(work, target);
    std::optional<Edge> pick;
    std::size_t best_product = std::numeric_limits<std::size_t>::max();
    for (NodeId u : ball) {
      for (NodeId v : work.neighbors(u)) {
        if (v <= u || !std::binary_search(ball.begin(), ball.end(), v)) continue;
        const std::size_t product = (work.degree(u) + 1) * (work.degree(v) + 1);
        if (product < best_product) {  // ball and neighbor lists are ascending
          best_product = product;
          pick = Edge{u, v};
        }
      }
    }
    if (!pick) break;
    const EdgeFlip f{pick->first, pick->second, FlipAction::remove};
    work.apply(f);
    plan.flips.push_back(f);
    plan.scores.push_back(1.0 / std::sqrt(static_cast<double>(best_product)));
  }
  return plan;
}

inline AttackPlan run_attack(AttackKind a, const Graph& g, NodeId target,
                             std::optional<std::size_t> budget = std::nullopt) {
  const std::size_t b = budget.value_or(default_budget(a, g, target));
  switch (a) {
    case AttackKind::nettack: return attack_nettack(g, target, b);
    case AttackKind::meta: return attack_meta(g, target, b);
    case AttackKind::gradargmax: return attack_gradargmax(g, target, b);
  }
  throw ValidationError("unknown attack");
}

/// A plan succeeds when it changes the surrogate's predicted class for the target
/// (argmax of the target's Â²C row, C from the clean labels).
inline bool attack_succeeded(const Graph& clean, const Graph& perturbed, NodeId target) {
  const ClassScoreMatrix c = class_scores_from_labels(clean);
  return surrogate_prediction(clean, c, target) != surrogate_prediction(perturbed, c, target);
}

// ---------------------------------------------------------------------------
// Serialization

/// "attack_name target u v action score", one line per flip. Node ids are translated through
/// `ids` (e.g. Graph::original_ids()) when it is non-empty.
inline void write_plan_lines(std::ostream& out, const AttackPlan& plan, std::span<const std::int64_t> ids = {}) {
  auto id = [&](NodeId v) { return ids.empty() ? static_cast<std::int64_t>(v) : ids[v]; };
  const auto old = out.precision(12);
  for (std::size_t i = 0; i < plan.flips.size(); ++i) {
    const EdgeFlip& f = plan.flips[i];
    out << to_string(plan.attack) << ' ' << id(plan.target) << ' ' << id(f.u) << ' ' << id(f.v) << ' '
        << to_string(f.action) << ' ' << plan.scores[i] << '\n';
  }
  out.precision(old);
}

inline nlohmann::json plan_summary(const AttackPlan& plan, bool success, std::span<const std::int64_t> ids = {}) {
  return {{"attack", to_string(plan.attack)},
          {"target", ids.empty() ? static_cast<std::int64_t>(plan.target) : ids[plan.target]},
          {"budget", plan.budget},
          {"flips", plan.flips.size()},
          {"success", success}};
}

}  // namespace advgraph
