#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "advgraph/error.hpp"

namespace advgraph {

/// Feature rows with dense class indices.
struct Dataset {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  int class_count = 2;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dimension() const noexcept { return feature_names.size(); }

  void validate() const {
    if (features.size() != labels.size()) throw ValidationError("feature/label row count mismatch");
    for (const auto& row : features) {
      if (row.size() != feature_names.size()) throw ValidationError("ragged feature rows");
    }
    for (int y : labels) {
      if (y < 0 || y >= class_count) throw ValidationError("class index out of range");
    }
  }

  /// Same rows restricted to the given feature columns, in the given order.
  Dataset select_features(std::span<const std::size_t> columns) const {
    Dataset out;
    out.labels = labels;
    out.class_count = class_count;
    for (std::size_t c : columns) out.feature_names.push_back(feature_names.at(c));
    out.features.reserve(features.size());
    for (const auto& row : features) {
      std::vector<double> r;
      r.reserve(columns.size());
      for (std::size_t c : columns) r.push_back(row[c]);
      out.features.push_back(std::move(r));
    }
    return out;
  }
};

/// 1 - sum_c (n_c / n)^2.
template <class Count>
double gini_impurity(std::span<const Count> counts) {
  double total = 0.0;
  for (Count c : counts) total += static_cast<double>(c);
  if (total <= 0.0) throw ValidationError("gini impurity of an empty histogram");
  double sq = 0.0;
  for (Count c : counts) {
    const double p = static_cast<double>(c) / total;
    sq += p * p;
  }
  return 1.0 - sq;
}

inline double gini_impurity(const std::vector<double>& counts) {
  return gini_impurity(std::span<const double>(counts));
}

/// Internal nodes send value <= threshold left. Leaves carry a class-count histogram.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> counts;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;            ///< nodes[0] is the root
  std::vector<double> impurity_decrease;  ///< per feature, sum of (node fraction * decrease)

  const TreeNode& leaf_for(std::span<const double> x) const {
    const TreeNode* node = &nodes.front();
    while (!node->is_leaf()) {
      node = &nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(node->feature)] <= node->threshold
                                                  ? node->left
                                                  : node->right)];
    }
    return *node;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }
};

struct TreeParams {
  int max_depth = 0;               ///< <= 0 means unbounded
  std::size_t min_leaf = 1;
  std::size_t features_per_split = 0;  ///< 0 means ceil(sqrt(F))
};

inline std::size_t default_features_per_split(std::size_t dimension) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dimension)))));
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of tree `index`; depends only on (seed, index) so trees can be trained in any order.
inline std::uint64_t tree_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, TreeParams params, std::uint64_t seed)
      : data_(data),
        params_(params),
        rng_(seed),
        k_(static_cast<std::size_t>(data.class_count)),
        mtry_(std::min(data.dimension(), params.features_per_split ? params.features_per_split
                                                                    : default_features_per_split(data.dimension()))) {}

  Tree build(std::vector<std::size_t> rows) {
    tree_.impurity_decrease.assign(data_.dimension(), 0.0);
    root_size_ = static_cast<double>(rows.size());
    rows_ = std::move(rows);
    grow(0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = 0.0;
  };

  std::vector<double> histogram(std::size_t begin, std::size_t end) const {
    std::vector<double> h(k_, 0.0);
    for (std::size_t i = begin; i < end; ++i) h[static_cast<std::size_t>(data_.labels[rows_[i]])] += 1.0;
    return h;
  }

  int grow(std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::vector<double> counts = histogram(begin, end);
    const std::size_t n = end - begin;
    const double impurity = gini_impurity(counts);

    const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
    Split best;
    if (impurity > 0.0 && !depth_capped && n >= 2 * params_.min_leaf) best = find_split(begin, end, counts, impurity);
    if (!best.found) {
      tree_.nodes[static_cast<std::size_t>(id)].counts = std::move(counts);
      return id;
    }

    const auto mid_it = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                       rows_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t r) {
                                         return data_.features[r][best.feature] <= best.threshold;
                                       });
    const auto mid = static_cast<std::size_t>(mid_it - rows_.begin());
    tree_.impurity_decrease[best.feature] += static_cast<double>(n) / root_size_ * std::max(0.0, best.decrease);
    const int left = grow(begin, mid, depth + 1);
    const int right = grow(mid, end, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  /// Visits features in random order until mtry non-constant ones have been scored.
  Split find_split(std::size_t begin, std::size_t end, const std::vector<double>& counts, double impurity) {
    const std::size_t dim = data_.dimension();
    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);

    const std::size_t n = end - begin;
    const double nd = static_cast<double>(n);
    std::vector<std::pair<double, int>> column(n);
    std::vector<double> left(k_), right(k_);
    Split best;
    std::size_t scored = 0;

    for (std::size_t f : order) {
      if (scored >= mtry_) break;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = rows_[begin + i];
        column[i] = {data_.features[r][f], data_.labels[r]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++scored;

      std::fill(left.begin(), left.end(), 0.0);
      right = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto y = static_cast<std::size_t>(column[i].second);
        left[y] += 1.0;
        right[y] -= 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
        const double decrease = impurity - static_cast<double>(nl) / nd * gini_impurity(std::span<const double>(left)) -
                                static_cast<double>(nr) / nd * gini_impurity(std::span<const double>(right));
        double threshold = 0.5 * (column[i].first + column[i + 1].first);
        if (!(threshold < column[i + 1].first)) threshold = column[i].first;  // adjacent doubles
        const bool better = !best.found || decrease > best.decrease ||
                            (decrease == best.decrease &&
                             (f < best.feature || (f == best.feature && threshold < best.threshold)));
        if (better) best = {true, f, threshold, decrease};
      }
    }
    return best;
  }

  const Dataset& data_;
  TreeParams params_;
  std::mt19937_64 rng_;
  std::size_t k_;
  std::size_t mtry_;
  std::vector<std::size_t> rows_;
  double root_size_ = 1.0;
  Tree tree_;
};

}  // namespace detail

/// CART tree with Gini splits over the given rows (duplicates allowed, as in a bootstrap).
inline Tree train_tree(const Dataset& data, std::span<const std::size_t> rows, TreeParams params, std::uint64_t seed) {
  if (rows.empty()) throw ValidationError("cannot train a tree on zero rows");
  return detail::TreeBuilder(data, params, seed).build({rows.begin(), rows.end()});
}

inline Tree train_tree(const Dataset& data, TreeParams params, std::uint64_t seed) {
  data.validate();
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  return train_tree(data, rows, params, seed);
}

struct ForestParams {
  std::size_t n_trees = 100;
  TreeParams tree;
  std::uint64_t seed = 0;
  unsigned threads = 1;  ///< results do not depend on this
};

struct Forest {
  std::vector<Tree> trees;
  std::vector<std::string> feature_names;
  int class_count = 2;
  std::vector<double> importances;  ///< mean decrease in impurity, normalized to sum 1
  bool uniform_importance_fallback = false;  ///< no split anywhere: importances are 1/F
  std::uint64_t seed = 0;

  std::size_t dimension() const noexcept { return feature_names.size(); }

  /// Mean over trees of the leaf class frequencies.
  std::vector<double> predict_proba(std::span<const double> x) const {
    if (x.size() != dimension()) {
      throw ValidationError("feature vector has dimension " + std::to_string(x.size()) + ", forest expects " +
                            std::to_string(dimension()));
    }
    std::vector<double> p(static_cast<std::size_t>(class_count), 0.0);
    for (const Tree& t : trees) {
      const auto& counts = t.leaf_for(x).counts;
      const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
      for (std::size_t c = 0; c < p.size(); ++c) p[c] += counts[c] / total;
    }
    for (double& v : p) v /= static_cast<double>(trees.size());
    return p;
  }

  int predict(std::span<const double> x) const {
    const auto p = predict_proba(x);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  }

  /// Feature indices by decreasing importance; ties keep the lower index first.
  std::vector<std::size_t> ranking() const {
    std::vector<std::size_t> idx(importances.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return importances[a] > importances[b]; });
    return idx;
  }
};

namespace detail {

inline Tree train_bagged_tree(const Dataset& data, const ForestParams& params, std::size_t index) {
  std::mt19937_64 rng(tree_seed(params.seed, index));
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<std::size_t> rows(data.size());
  for (auto& r : rows) r = pick(rng);
  return train_tree(data, rows, params.tree, rng());
}

}  // namespace detail

/// Bagged CART ensemble. Importance of a feature is its summed (node fraction * impurity
/// decrease), averaged over trees and normalized to sum 1.
inline Forest train_forest(const Dataset& data, const ForestParams& params) {
  data.validate();
  if (data.size() == 0) throw ValidationError("cannot train a forest on an empty dataset");
  if (params.n_trees == 0) throw ValidationError("forest needs at least one tree");

  Forest forest;
  forest.feature_names = data.feature_names;
  forest.class_count = data.class_count;
  forest.seed = params.seed;
  forest.trees.resize(params.n_trees);

  const unsigned workers = std::max(1u, std::min<unsigned>(params.threads, static_cast<unsigned>(params.n_trees)));
  if (workers == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) forest.trees[t] = detail::train_bagged_tree(data, params, t);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < params.n_trees; t += workers) forest.trees[t] = detail::train_bagged_tree(data, params, t);
      });
    }
    for (auto& th : pool) th.join();
  }

  const std::size_t dim = data.dimension();
  forest.importances.assign(dim, 0.0);
  for (const Tree& t : forest.trees) {
    for (std::size_t f = 0; f < dim; ++f) forest.importances[f] += t.impurity_decrease[f];
  }
  double total = 0.0;
  for (double& v : forest.importances) {
    v /= static_cast<double>(forest.trees.size());
    total += v;
  }
  if (total > 0.0) {
    for (double& v : forest.importances) v /= total;
  } else {
    forest.uniform_importance_fallback = true;
    std::fill(forest.importances.begin(), forest.importances.end(), dim ? 1.0 / static_cast<double>(dim) : 0.0);
  }
  return forest;
}

// ---------------------------------------------------------------------------
// JSON

inline constexpr int kForestFormatVersion = 1;

namespace detail {

inline nlohmann::json node_to_json(const Tree& t, int id) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(id)];
  if (n.is_leaf()) return {{"counts", n.counts}};
  return {{"feature", n.feature}, {"threshold", n.threshold}, {"left", node_to_json(t, n.left)}, {"right", node_to_json(t, n.right)}};
}

inline int node_from_json(const nlohmann::json& j, Tree& t, std::size_t dim, std::size_t classes) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("counts")) {
    auto counts = j.at("counts").get<std::vector<double>>();
    if (counts.size() != classes) throw ValidationError("leaf histogram has wrong class count");
    t.nodes[static_cast<std::size_t>(id)].counts = std::move(counts);
    return id;
  }
  const int feature = j.at("feature").get<int>();
  if (feature < 0 || static_cast<std::size_t>(feature) >= dim) throw ValidationError("split feature out of range");
  const double threshold = j.at("threshold").get<double>();
  const int left = node_from_json(j.at("left"), t, dim, classes);
  const int right = node_from_json(j.at("right"), t, dim, classes);
  TreeNode& n = t.nodes[static_cast<std::size_t>(id)];
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return id;
}

}  // namespace detail

inline nlohmann::json forest_to_json(const Forest& f) {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : f.trees) trees.push_back(detail::node_to_json(t, 0));
  return {{"format", "advgraph-forest"},
          {"version", kForestFormatVersion},
          {"seed", f.seed},
          {"class_count", f.class_count},
          {"feature_names", f.feature_names},
          {"importances", f.importances},
          {"uniform_importance_fallback", f.uniform_importance_fallback},
          {"trees", trees}};
}

inline Forest forest_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "advgraph-forest") throw ValidationError("not a serialized forest");
  const int version = j.at("version").get<int>();
  if (version != kForestFormatVersion) throw ValidationError("unsupported forest format version " + std::to_string(version));
  Forest f;
  f.seed = j.at("seed").get<std::uint64_t>();
  f.class_count = j.at("class_count").get<int>();
  f.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  f.importances = j.at("importances").get<std::vector<double>>();
  f.uniform_importance_fallback = j.value("uniform_importance_fallback", false);
  for (const auto& jt : j.at("trees")) {
    Tree t;
    detail::node_from_json(jt, t, f.dimension(), static_cast<std::size_t>(f.class_count));
    f.trees.push_back(std::move(t));
  }
  return f;
}

}  // namespace advgraph
