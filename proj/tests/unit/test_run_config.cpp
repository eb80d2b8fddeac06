#include <gtest/gtest.h>

#include "advgraph/run_config.hpp"

using namespace advgraph;

TEST(RunConfig, MinimalDatasetConfig) {
  const RunConfig c = parse_run_config(std::string(R"({"dataset": {"name": "cora", "edges": "c.edges", "labels": "c.labels"}})"));
  ASSERT_TRUE(c.dataset.has_value());
  EXPECT_EQ(c.dataset_name(), "cora");
  EXPECT_EQ(c.attacks.size(), 3u);
  EXPECT_EQ(c.n_targets, 100u);
  EXPECT_EQ(c.top_k, 4u);
  EXPECT_EQ(c.n_trees, 100u);
  EXPECT_EQ(c.effective_split_seed(), 0u);
}

TEST(RunConfig, SyntheticWithCommentsAndOverrides) {
  const RunConfig c = parse_run_config(std::string(R"({
    // small run
    "synthetic": {"model": "barabasi-albert", "nodes": 80, "seed": 3},
    "attacks": ["meta", {"name": "nettack", "budget": 2}],
    "seed": 9,
    "split_seed": 4,
    "k_values": [1, 17]
  })"));
  ASSERT_TRUE(c.synthetic.has_value());
  EXPECT_EQ(c.synthetic->spec.model, GraphModel::barabasi_albert);
  EXPECT_EQ(c.synthetic->spec.parameter, 2.0);
  EXPECT_EQ(c.dataset_name(), "barabasi-albert-80-s3");
  ASSERT_EQ(c.attacks.size(), 2u);
  EXPECT_EQ(c.attacks[0].kind, AttackKind::meta);
  EXPECT_FALSE(c.attacks[0].budget.has_value());
  EXPECT_EQ(c.attacks[1].budget, 2u);
  EXPECT_EQ(c.effective_split_seed(), 4u);
  EXPECT_EQ(c.k_values, (std::vector<std::size_t>{1, 17}));
}

TEST(RunConfig, RejectsUnknownAttack) {
  try {
    parse_run_config(std::string(R"({"synthetic": {}, "attacks": ["fga"]})"));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("fga"), std::string::npos);
  }
}

TEST(RunConfig, RejectsBadShapes) {
  auto bad = [](const char* text) { return [text] { parse_run_config(std::string(text)); }; };
  EXPECT_THROW(bad(R"({})")(), ValidationError);
  EXPECT_THROW(bad(R"({"synthetic": {}, "dataset": {"edges": "a", "labels": "b"}})")(), ValidationError);
  EXPECT_THROW(bad(R"({"synthetic": {}, "n_trees": "many"})")(), ValidationError);
  EXPECT_THROW(bad(R"({"synthetic": {}, "top_k": 18})")(), ValidationError);
  EXPECT_THROW(bad(R"({"synthetic": {}, "bogus": 1})")(), ValidationError);
  EXPECT_THROW(bad(R"({"synthetic": {"nodez": 5}})")(), ValidationError);
  EXPECT_THROW(bad(R"({"synthetic": {"model": "lattice"}})")(), ValidationError);
  EXPECT_THROW(bad(R"({"synthetic": {}, "attacks": ["meta", "meta"]})")(), ValidationError);
  EXPECT_THROW(bad(R"({"synthetic": {}, "attacks": [{"name": "meta", "budget": 0}]})")(), ValidationError);
  EXPECT_THROW(bad(R"({"dataset": {"edges": "a"}})")(), ValidationError);
  EXPECT_THROW(bad(R"({"synthetic": )")(), ParseError);
  EXPECT_THROW(load_run_config("/nonexistent/config.json"), std::runtime_error);
}
