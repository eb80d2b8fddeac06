#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "advgraph/attacks.hpp"
#include "advgraph/attributes.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace advgraph;

namespace {

oracle::Vector dense_row(const Graph& g, const std::vector<int>& labels, int classes, NodeId t) {
  const auto e = g.edges();
  const auto s = oracle::surrogate_scores(oracle::adjacency(g.node_count(), e), oracle::one_hot(labels, classes));
  return s.row(static_cast<Eigen::Index>(t)).transpose();
}

double dense_margin(const oracle::Vector& row, int y_old) {
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index y = 0; y < row.size(); ++y) {
    if (y != y_old) best = std::max(best, row(y) - row(y_old));
  }
  return best;
}

Graph flipped(const Graph& g, NodeId u, NodeId v) {
  const EdgeFlip f{u, v, g.has_edge(u, v) ? FlipAction::remove : FlipAction::add};
  return apply_flips(g, std::span(&f, 1));
}

std::vector<int> labels_of(const Graph& g) { return {g.labels().begin(), g.labels().end()}; }

}  // namespace

TEST(Attacks, Names) {
  EXPECT_EQ(parse_attack("nettack"), AttackKind::nettack);
  EXPECT_EQ(parse_attack("meta"), AttackKind::meta);
  EXPECT_EQ(parse_attack("gradargmax"), AttackKind::gradargmax);
  EXPECT_FALSE(parse_attack("fga").has_value());
  for (AttackKind a : kAllAttacks) EXPECT_EQ(parse_attack(to_string(a)), a);
}

TEST(Attacks, DefaultBudgets) {
  const Graph s = fixtures::star(3);
  EXPECT_EQ(default_budget(AttackKind::nettack, s, 0), 3u);
  EXPECT_EQ(default_budget(AttackKind::meta, s, 1), 1u);
  EXPECT_EQ(default_budget(AttackKind::nettack, fixtures::make(2, {}), 0), 1u);
  EXPECT_EQ(default_budget(AttackKind::gradargmax, s, 0), 2u);
}

TEST(Attacks, ArgumentChecks) {
  const Graph g = fixtures::path(3, {0, 1, 0});
  for (AttackKind a : kAllAttacks) {
    EXPECT_THROW(run_attack(a, g, 1, 0), ValidationError);
    EXPECT_THROW(run_attack(a, g, 3, 1), std::out_of_range);
  }
}

namespace {

/// Best single flip at the target by brute force, if any beats the current margin.
std::optional<std::pair<NodeId, double>> exhaustive_nettack_step(const Graph& g, NodeId t) {
  const auto labels = labels_of(g);
  double best = dense_margin(dense_row(g, labels, g.class_count(), t), labels[t]);
  std::optional<std::pair<NodeId, double>> pick;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (v == t) continue;
    const double m = dense_margin(dense_row(flipped(g, t, v), labels, g.class_count(), t), labels[t]);
    if (m > best) {
      best = m;
      pick = {v, m};
    }
  }
  return pick;
}

}  // namespace

TEST(Nettack, PathExampleIsAlreadyMisclassified) {
  // Two class-0 neighbors outweigh the target's own class-1 label; every flip only helps class 1.
  const Graph g = fixtures::path(3, {0, 1, 0});
  EXPECT_GT(dense_margin(dense_row(g, labels_of(g), 2, 1), 1), 0.0);
  EXPECT_FALSE(exhaustive_nettack_step(g, 1).has_value());
  EXPECT_TRUE(attack_nettack(g, 1, 1).empty());
}

TEST(Nettack, BudgetOneMatchesExhaustiveSearch) {
  const Graph g = fixtures::path(4, {0, 0, 1, 1});
  for (NodeId t = 0; t < 4; ++t) {
    const auto want = exhaustive_nettack_step(g, t);
    const AttackPlan plan = attack_nettack(g, t, 1);
    ASSERT_EQ(plan.flips.size(), want ? 1u : 0u) << "target " << t;
    if (!want) continue;
    EXPECT_EQ(plan.flips[0].key(), detail::make_key(t, want->first));
    EXPECT_NEAR(plan.scores[0], want->second, 1e-12);
  }
}

TEST(Nettack, EveryStepIsTheExhaustiveBest) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto rg = fixtures::random_graph(9, 0.3, 3, rng);
    const NodeId t = static_cast<NodeId>(trial) % rg.n;
    const AttackPlan plan = attack_nettack(rg.graph, t, 3);
    Graph cur = rg.graph;
    std::set<Edge> used;
    for (std::size_t step = 0; step <= plan.flips.size() && step < 3; ++step) {
      const double current = dense_margin(dense_row(cur, rg.labels, rg.classes, t), rg.labels[t]);
      double best = current;
      for (NodeId v = 0; v < rg.n; ++v) {
        if (v == t || used.count(detail::make_key(t, v))) continue;
        best = std::max(best, dense_margin(dense_row(flipped(cur, t, v), rg.labels, rg.classes, t), rg.labels[t]));
      }
      if (step == plan.flips.size()) {
        EXPECT_LE(best, current + 1e-12) << "stopped although a flip improves";
        break;
      }
      const EdgeFlip& f = plan.flips[step];
      ASSERT_TRUE(f.u == t || f.v == t);
      const Graph next = flipped(cur, f.u, f.v);
      EXPECT_NEAR(dense_margin(dense_row(next, rg.labels, rg.classes, t), rg.labels[t]), best, 1e-12);
      EXPECT_NEAR(plan.scores[step], best, 1e-12);
      used.insert(f.key());
      cur = next;
    }
  }
}

TEST(Meta, EveryStepIsTheBestPairAnywhere) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 25; ++trial) {
    const auto rg = fixtures::random_graph(9, 0.25, 3, rng);
    const NodeId t = static_cast<NodeId>(trial) % rg.n;
    const AttackPlan plan = attack_meta(rg.graph, t, 3);
    Graph cur = rg.graph;
    std::set<Edge> used;
    for (std::size_t step = 0; step <= plan.flips.size() && step < 3; ++step) {
      const oracle::Vector before = dense_row(cur, rg.labels, rg.classes, t);
      oracle::Vector grad = (before.array() - before.maxCoeff()).exp();
      grad /= grad.sum();
      grad(rg.labels[t]) -= 1.0;
      double best = -std::numeric_limits<double>::infinity();
      for (NodeId u = 0; u < rg.n; ++u) {
        for (NodeId v = u + 1; v < rg.n; ++v) {
          if (used.count({u, v})) continue;
          best = std::max(best, grad.dot(dense_row(flipped(cur, u, v), rg.labels, rg.classes, t) - before));
        }
      }
      if (step == plan.flips.size()) {
        EXPECT_LE(best, 1e-12) << "stopped although a flip raises the loss";
        break;
      }
      const EdgeFlip& f = plan.flips[step];
      const Graph next = flipped(cur, f.u, f.v);
      EXPECT_NEAR(grad.dot(dense_row(next, rg.labels, rg.classes, t) - before), best, 1e-12);
      EXPECT_NEAR(plan.scores[step], best, 1e-12);
      EXPECT_GT(plan.scores[step], 0.0);
      used.insert(f.key());
      cur = next;
    }
  }
}

TEST(Meta, LargerBudgetExtendsThePlan) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rg = fixtures::random_graph(12, 0.25, 3, rng);
    const NodeId t = static_cast<NodeId>(trial) % rg.n;
    const AttackPlan small = attack_meta(rg.graph, t, 2);
    const AttackPlan large = attack_meta(rg.graph, t, 5);
    ASSERT_LE(small.flips.size(), large.flips.size());
    for (std::size_t i = 0; i < small.flips.size(); ++i) EXPECT_EQ(small.flips[i], large.flips[i]);
  }
}

TEST(Meta, GlobalCandidatesOnlyBreakTies) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rg = fixtures::random_graph(14, 0.15, 3, rng);
    const NodeId t = static_cast<NodeId>(trial) % rg.n;
    const AttackPlan local = attack_meta(rg.graph, t, 3);
    const AttackPlan global = attack_meta(rg.graph, t, 3, {.global_candidates = true});
    EXPECT_EQ(local.flips, global.flips);
  }
}

TEST(GradArgmax, DeletesSmallestDegreeProductInBall) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 40; ++trial) {
    const auto rg = fixtures::random_graph(10, 0.3, 2, rng);
    const NodeId t = static_cast<NodeId>(trial) % rg.n;
    const AttackPlan plan = attack_gradargmax(rg.graph, t);
    EXPECT_EQ(plan.budget, 2u);
    Graph cur = rg.graph;
    for (std::size_t step = 0; step <= plan.flips.size() && step < 2; ++step) {
      const auto ball = two_hop_ball(cur, t);
      std::optional<Edge> want;
      std::size_t best = std::numeric_limits<std::size_t>::max();
      for (auto [u, v] : cur.edges()) {
        if (!std::binary_search(ball.begin(), ball.end(), u) || !std::binary_search(ball.begin(), ball.end(), v)) continue;
        const std::size_t prod = (cur.degree(u) + 1) * (cur.degree(v) + 1);
        if (prod < best) {
          best = prod;
          want = Edge{u, v};
        }
      }
      if (step == plan.flips.size()) {
        EXPECT_FALSE(want.has_value());
        break;
      }
      ASSERT_TRUE(want.has_value());
      const EdgeFlip& f = plan.flips[step];
      EXPECT_EQ(f.key(), *want);
      EXPECT_EQ(f.action, FlipAction::remove);
      EXPECT_DOUBLE_EQ(plan.scores[step], 1.0 / std::sqrt(static_cast<double>(best)));
      cur = apply_flips(cur, std::span(&f, 1));
    }
  }
}

TEST(GradArgmax, ShrinksTheEgoSubgraph) {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 60; ++trial) {
    const auto rg = fixtures::random_graph(12, 0.25, 2, rng);
    const NodeId t = static_cast<NodeId>(trial) % rg.n;
    const AttackPlan plan = attack_gradargmax(rg.graph, t);
    if (plan.empty()) {
      EXPECT_EQ(ego_subgraph(rg.graph, t).induced.edge_count(), 0u);
      continue;
    }
    const auto before = ego_subgraph(rg.graph, t);
    const auto after = ego_subgraph(apply_flips(rg.graph, plan.flips), t);
    EXPECT_LT(after.induced.edge_count(), before.induced.edge_count());
    EXPECT_LE(after.members.size(), before.members.size());
  }
}

TEST(GradArgmax, StarCenterLosesTwoLeafEdges) {
  const AttackPlan plan = attack_gradargmax(fixtures::star(3), 0);
  ASSERT_EQ(plan.flips.size(), 2u);
  EXPECT_EQ(plan.flips[0], (EdgeFlip{0, 1, FlipAction::remove}));
  EXPECT_EQ(plan.flips[1], (EdgeFlip{0, 2, FlipAction::remove}));
  // Augmented degrees (4, 2) for the first cut, (3, 2) for the second.
  EXPECT_DOUBLE_EQ(plan.scores[0], 1.0 / std::sqrt(8.0));
  EXPECT_DOUBLE_EQ(plan.scores[1], 1.0 / std::sqrt(6.0));
}

TEST(GradArgmax, IsolatesAPendantPair) {
  // Target 0 hangs off node 1, which has no other neighbor: that edge has the smallest product.
  const Graph g = fixtures::make(5, {{0, 1}, {2, 3}, {3, 4}, {2, 4}});
  const AttackPlan plan = attack_gradargmax(g, 0);
  ASSERT_EQ(plan.flips.size(), 1u);
  EXPECT_EQ(plan.flips[0], (EdgeFlip{0, 1, FlipAction::remove}));
  EXPECT_TRUE(apply_flips(g, plan.flips).neighbors(0).empty());
  EXPECT_TRUE(attack_gradargmax(fixtures::make(3, {{1, 2}}), 0).empty());
}

TEST(Nettack, NewNeighborsHaveSmallDegree) {
  std::mt19937_64 rng(28);
  std::vector<std::size_t> linked, all;
  for (int seed = 0; seed < 100; ++seed) {
    const auto rg = fixtures::random_graph(20, 0.15, 3, rng);
    for (NodeId v = 0; v < rg.n; ++v) all.push_back(rg.graph.degree(v));
    const NodeId t = static_cast<NodeId>(seed) % rg.n;
    for (const auto& f : run_attack(AttackKind::nettack, rg.graph, t).flips) {
      if (f.action == FlipAction::add) linked.push_back(rg.graph.degree(f.u == t ? f.v : f.u));
    }
  }
  ASSERT_FALSE(linked.empty());
  auto median = [](std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  EXPECT_LE(median(linked), median(all));
}

TEST(Meta, FlipEndpointsHaveBelowAverageDegreeForTheirRegion) {
  // Endpoints are compared with the two-hop ball they are drawn from. Against the whole graph
  // they are not lower: the ball itself is biased towards well-connected nodes.
  std::mt19937_64 rng(29);
  double endpoint_sum = 0.0, ball_sum = 0.0;
  std::size_t endpoints = 0, ball_nodes = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto rg = fixtures::random_graph(20, 0.15, 3, rng);
    const NodeId t = static_cast<NodeId>(trial) % rg.n;
    for (NodeId v : two_hop_ball(rg.graph, t)) {
      ball_sum += static_cast<double>(rg.graph.degree(v));
      ++ball_nodes;
    }
    for (const auto& f : run_attack(AttackKind::meta, rg.graph, t).flips) {
      endpoint_sum += static_cast<double>(rg.graph.degree(f.u) + rg.graph.degree(f.v));
      endpoints += 2;
    }
  }
  ASSERT_GT(endpoints, 0u);
  EXPECT_LT(endpoint_sum / static_cast<double>(endpoints), ball_sum / static_cast<double>(ball_nodes));
}

TEST(Attacks, PlansAreValidAndDeterministic) {
  std::mt19937_64 rng(27);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rg = fixtures::random_graph(15, 0.2, 3, rng);
    const NodeId t = static_cast<NodeId>(trial) % rg.n;
    for (AttackKind a : kAllAttacks) {
      const AttackPlan p = run_attack(a, rg.graph, t);
      const AttackPlan q = run_attack(a, rg.graph, t);
      EXPECT_EQ(p.flips, q.flips);
      EXPECT_EQ(p.scores, q.scores);
      EXPECT_LE(p.flips.size(), p.budget);
      EXPECT_EQ(p.flips.size(), p.scores.size());
      std::set<Edge> keys;
      for (const auto& f : p.flips) EXPECT_TRUE(keys.insert(f.key()).second);
      EXPECT_NO_THROW(apply_flips(rg.graph, p.flips));
      if (a == AttackKind::nettack) {
        for (const auto& f : p.flips) EXPECT_TRUE(f.u == t || f.v == t);
      }
    }
  }
}

TEST(Attacks, SuccessMeansPredictionChanged) {
  // Target 1 sits between two class-0 nodes; cutting both links leaves only its own label.
  const Graph g = fixtures::path(3, {0, 1, 0});
  const Graph cut = apply_flips(g, std::vector<EdgeFlip>{{0, 1, FlipAction::remove}, {1, 2, FlipAction::remove}});
  EXPECT_TRUE(attack_succeeded(g, cut, 1));
  EXPECT_FALSE(attack_succeeded(g, g, 1));
}

TEST(Attacks, PlanSerialization) {
  AttackPlan plan{AttackKind::gradargmax, 3, 2, {{3, 5, FlipAction::remove}, {1, 3, FlipAction::add}}, {0.25, 0.5}};
  std::ostringstream out;
  write_plan_lines(out, plan);
  EXPECT_EQ(out.str(), "gradargmax 3 3 5 delete 0.25\ngradargmax 3 1 3 add 0.5\n");
  const std::vector<std::int64_t> ids{10, 11, 12, 13, 14, 15};
  std::ostringstream mapped;
  write_plan_lines(mapped, plan, ids);
  EXPECT_EQ(mapped.str(), "gradargmax 13 13 15 delete 0.25\ngradargmax 13 11 13 add 0.5\n");
  const auto j = plan_summary(plan, true);
  EXPECT_EQ(j.at("attack"), "gradargmax");
  EXPECT_EQ(j.at("target"), 3);
  EXPECT_EQ(j.at("budget"), 2);
  EXPECT_EQ(j.at("flips"), 2);
  EXPECT_EQ(j.at("success"), true);
}
