#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "advgraph/graph.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace advgraph;

TEST(Graph, DropsSelfLoopsAndDuplicates) {
  const Graph g = fixtures::make(3, {{0, 1}, {1, 0}, {1, 1}, {1, 2}, {0, 1}});
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.neighbors(1), (std::vector<NodeId>{0, 2}));
  EXPECT_TRUE(g.has_edge(2, 1));
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 1}, {1, 2}}));
}

TEST(Graph, RejectsBadInput) {
  EXPECT_THROW(fixtures::make(2, {{0, 2}}), std::out_of_range);
  EXPECT_THROW(Graph(2, {}, {0}, 2), ValidationError);
  EXPECT_THROW(Graph(2, {}, {0, 2}, 2), ValidationError);
  EXPECT_THROW(Graph(2, {}, {0, -1}, 2), ValidationError);
  EXPECT_THROW(Graph(2, {}, {0, 0}, 1), ValidationError);
  EXPECT_THROW(fixtures::path(3).degree(3), std::out_of_range);
}

TEST(EditableGraph, ApplyChecksEachFlip) {
  EditableGraph w(fixtures::path(3));
  w.apply({0, 2, FlipAction::add});
  EXPECT_TRUE(w.has_edge(2, 0));
  EXPECT_EQ(w.edge_count(), 3u);
  w.apply({1, 0, FlipAction::remove});
  EXPECT_FALSE(w.has_edge(0, 1));
  EXPECT_THROW(w.apply({0, 2, FlipAction::add}, 4), InvalidFlipError);
  EXPECT_THROW(w.apply({0, 1, FlipAction::remove}), InvalidFlipError);
  EXPECT_THROW(w.apply({1, 1, FlipAction::add}), InvalidFlipError);
  EXPECT_THROW(w.apply({0, 9, FlipAction::add}), InvalidFlipError);
  try {
    w.apply({0, 2, FlipAction::add}, 4);
  } catch (const InvalidFlipError& e) {
    EXPECT_EQ(e.index(), 4u);
  }
}

TEST(EditableGraph, ApplyFlipsReportsOffendingIndex) {
  const Graph g = fixtures::path(4);
  const std::vector<EdgeFlip> flips{{0, 3, FlipAction::add}, {1, 2, FlipAction::remove}, {1, 2, FlipAction::remove}};
  try {
    apply_flips(g, flips);
    FAIL() << "expected InvalidFlipError";
  } catch (const InvalidFlipError& e) {
    EXPECT_EQ(e.index(), 2u);
  }
  EXPECT_EQ(g.edge_count(), 3u);  // input untouched
}

TEST(EditableGraph, FlipsAreInvolutions) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rg = fixtures::random_graph(8, 0.4, 3, rng);
    std::uniform_int_distribution<NodeId> node(0, 7);
    std::vector<EdgeFlip> flips;
    EditableGraph w(rg.graph);
    for (int i = 0; i < 6; ++i) {
      NodeId u = node(rng), v = node(rng);
      if (u == v) continue;
      const EdgeFlip f{u, v, w.has_edge(u, v) ? FlipAction::remove : FlipAction::add};
      w.apply(f);
      flips.push_back(f);
    }
    std::vector<EdgeFlip> undo;
    for (auto it = flips.rbegin(); it != flips.rend(); ++it) undo.push_back(it->inverted());
    EXPECT_EQ(apply_flips(apply_flips(rg.graph, flips), undo), rg.graph);
  }
}

TEST(GraphQueries, CommonNeighborsAndDistances) {
  const Graph g = fixtures::make(5, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
  EXPECT_EQ(common_neighbors(g, 0, 3), (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(common_neighbors(g, 1, 1), g.neighbors(1));
  EXPECT_EQ(bfs_distances(g, 0), (std::vector<int>{0, 1, 1, 2, -1}));
  EXPECT_EQ(bfs_distances(g, 0, 1), (std::vector<int>{0, 1, 1, -1, -1}));
  EXPECT_EQ(two_hop_ball(fixtures::path(6), 1), (std::vector<NodeId>{0, 1, 2, 3}));
}

TEST(EgoSubgraph, PathCenters) {
  const Graph p = fixtures::path(5);
  const EgoSubgraph mid = ego_subgraph(p, 2);
  EXPECT_EQ(mid.members, (std::vector<NodeId>{0, 1, 2, 3, 4}));
  EXPECT_EQ(mid.induced.edge_count(), 4u);
  const EgoSubgraph end = ego_subgraph(p, 0);
  EXPECT_EQ(end.members, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(end.local_center(), 0u);
  EXPECT_EQ(ego_subgraph(p, 4).local_center(), 2u);
}

TEST(EgoSubgraph, MatchesAllPairsDistances) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto rg = fixtures::random_graph(10, 0.25, 2, rng);
    const auto a = oracle::adjacency(rg.n, rg.edges);
    for (NodeId c = 0; c < rg.n; ++c) {
      const EgoSubgraph sg = ego_subgraph(rg.graph, c);
      const auto members = oracle::ego_members(a, c);
      ASSERT_EQ(sg.members, members);
      const auto h = oracle::induced(a, members);
      EXPECT_DOUBLE_EQ(static_cast<double>(sg.induced.edge_count()), h.sum() / 2.0);
    }
  }
}

TEST(LoadGraph, ParsesCommentsAndRemapsIds) {
  std::istringstream edges("# citation edges\n10 30\n\n  # indented comment\n30 20\n10 10\n");
  std::istringstream labels("10 0\n20 1\n30 2\n");
  const Graph g = load_graph(edges, labels);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.class_count(), 3);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_TRUE(g.has_edge(0, 2));
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_EQ(std::vector<std::int64_t>(g.original_ids().begin(), g.original_ids().end()),
            (std::vector<std::int64_t>{10, 20, 30}));
  EXPECT_EQ(g.label(1), 1);
}

TEST(LoadGraph, DenseIdsAreKept) {
  std::istringstream edges("0 1\n1 2\n");
  std::istringstream labels("0 0\n1 1\n2 0\n3 1\n");
  const Graph g = load_graph(edges, labels);
  EXPECT_EQ(g.node_count(), 4u);
  EXPECT_EQ(g.original_ids()[3], 3);
  EXPECT_TRUE(g.neighbors(3).empty());
}

TEST(LoadGraph, ReportsErrors) {
  auto load = [](const char* e, const char* l) {
    std::istringstream es(e), ls(l);
    return load_graph(es, ls);
  };
  try {
    load("0 1\n1 x\n", "0 0\n1 0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& err) {
    EXPECT_EQ(err.line(), 2u);
  }
  EXPECT_THROW(load("0 1 2\n", "0 0\n1 0\n"), ParseError);
  EXPECT_THROW(load("0 1\n", "0 0\n"), ValidationError);             // node 1 unlabeled
  EXPECT_THROW(load("0 1\n", "0 0\n1 0\n1 1\n"), ValidationError);   // conflicting labels
  EXPECT_THROW(load("0 1\n", "0 0\n1 -1\n"), ValidationError);
  EXPECT_THROW(load_graph_files("/nonexistent/edges", "/nonexistent/labels"), std::runtime_error);
}

TEST(LoadGraph, RoundTripsThroughWriters) {
  std::istringstream edges("5 7\n7 9\n9 5\n11 5\n");
  std::istringstream labels("5 0\n7 1\n9 1\n11 0\n");
  const Graph g = load_graph(edges, labels);
  std::ostringstream e2, l2;
  write_edge_list(g, e2);
  write_labels(g, l2);
  std::istringstream e3(e2.str()), l3(l2.str());
  const Graph h = load_graph(e3, l3);
  EXPECT_EQ(g, h);
  EXPECT_EQ(h.original_ids()[3], 11);
  std::ostringstream map;
  write_node_map(g, map);
  EXPECT_EQ(map.str(), "node_id,original_id\n0,5\n1,7\n2,9\n3,11\n");
}
