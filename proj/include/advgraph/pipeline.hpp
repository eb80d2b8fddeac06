#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "advgraph/attacks.hpp"
#include "advgraph/attributes.hpp"
#include "advgraph/error.hpp"
#include "advgraph/forest.hpp"
#include "advgraph/graph.hpp"
#include "advgraph/metrics.hpp"

namespace advgraph {

inline constexpr int kCleanLabel = 0;
inline constexpr int kAdversarialLabel = 1;

struct DetectionSample {
  AttributeVector attributes;
  int label = kCleanLabel;
  std::optional<AttackKind> attack;  ///< set on adversarial samples
  NodeId target = 0;
  std::string dataset;
};

struct AttackRecord {
  AttackPlan plan;
  bool success = false;
};

struct DetectionBuild {
  std::vector<DetectionSample> samples;  ///< clean/adversarial pairs, one pair per success
  std::vector<AttackRecord> attempts;
  std::size_t successes = 0;
  std::string diagnostic;  ///< non-empty when nothing succeeded

  double success_rate() const {
    return attempts.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(attempts.size());
  }
};

struct BuildOptions {
  std::size_t n_targets = 100;  ///< targets attacked (sampled without replacement)
  std::uint64_t seed = 0;
  std::string dataset;
  std::optional<std::size_t> budget;  ///< default: default_budget() per target
  /// When set, keep attacking further targets from the same sampled order until this many
  /// attacks succeeded; n_targets is then ignored and the whole node set may be used.
  std::optional<std::size_t> stop_after_successes;
};

/// Attacks sampled targets and keeps the successful ones, emitting for each the target's
/// attribute vector on the clean graph (label 0) and on the perturbed graph (label 1).
inline DetectionBuild build_detection_dataset(const Graph& g, AttackKind attack, const BuildOptions& opt) {
  if (opt.n_targets == 0 && !opt.stop_after_successes) throw ValidationError("n_targets must be at least 1");
  std::vector<NodeId> order(g.node_count());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opt.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t limit = opt.stop_after_successes ? order.size() : std::min(opt.n_targets, order.size());

  DetectionBuild out;
  const AttributeExtractor<Graph> clean_attrs(g);
  const ClassScoreMatrix c = class_scores_from_labels(g);
  for (std::size_t i = 0; i < limit; ++i) {
    if (opt.stop_after_successes && out.successes >= *opt.stop_after_successes) break;
    const NodeId target = order[i];
    AttackRecord rec{run_attack(attack, g, target, opt.budget), false};
    if (!rec.plan.empty()) {
      const Graph perturbed = apply_flips(g, rec.plan.flips);
      rec.success = surrogate_prediction(g, c, target) != surrogate_prediction(perturbed, c, target);
      if (rec.success) {
        out.samples.push_back({clean_attrs(target), kCleanLabel, std::nullopt, target, opt.dataset});
        out.samples.push_back({attribute_vector(perturbed, target), kAdversarialLabel, attack, target, opt.dataset});
        ++out.successes;
      }
    }
    out.attempts.push_back(std::move(rec));
  }
  if (out.successes == 0) {
    out.diagnostic = std::string(to_string(attack)) + ": no successful attack among " +
                     std::to_string(out.attempts.size()) + " targets";
  }
  return out;
}

inline Dataset to_dataset(const std::vector<DetectionSample>& samples, std::span<const std::size_t> rows,
                          const std::vector<int>& classes, int class_count) {
  Dataset d;
  d.class_count = class_count;
  for (auto name : kAttributeNames) d.feature_names.emplace_back(name);
  for (std::size_t r : rows) {
    d.features.emplace_back(samples[r].attributes.values.begin(), samples[r].attributes.values.end());
    d.labels.push_back(classes[r]);
  }
  return d;
}

struct SampleSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split that never separates samples of the same (dataset, target): groups are
/// bucketed by their sorted class signature and a `test_fraction` share of each bucket goes
/// to the test fold.
inline SampleSplit paired_split(const std::vector<DetectionSample>& samples, const std::vector<int>& classes,
                                std::uint64_t seed, double test_fraction = 0.2) {
  std::map<std::pair<std::string, NodeId>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) groups[{samples[i].dataset, samples[i].target}].push_back(i);

  std::map<std::vector<int>, std::vector<const std::vector<std::size_t>*>> buckets;
  for (const auto& [key, members] : groups) {
    std::vector<int> sig;
    for (std::size_t i : members) sig.push_back(classes[i]);
    std::sort(sig.begin(), sig.end());
    buckets[sig].push_back(&members);
  }

  std::mt19937_64 rng(seed);
  SampleSplit split;
  for (auto& [sig, list] : buckets) {
    std::shuffle(list.begin(), list.end(), rng);
    auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(list.size())));
    if (list.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, list.size() - 1);
    for (std::size_t g = 0; g < list.size(); ++g) {
      auto& fold = g < n_test ? split.test : split.train;
      fold.insert(fold.end(), list[g]->begin(), list[g]->end());
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

struct ModelMetrics {
  double acc = 0.0;
  double auc = 0.0;
  std::optional<double> precision;  ///< empty when nothing was flagged adversarial
};

struct MetricsReport {
  std::size_t k = 0;
  ModelMetrics top;  ///< model on the top-k attributes
  ModelMetrics all;  ///< model on all 17 attributes
  std::vector<double> importances;  ///< Gini importance of the 17 attributes (training fold)
  std::vector<std::size_t> ranking;  ///< attribute indices by decreasing importance
  std::vector<std::string> top_k_names;
  bool importance_fallback = false;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

inline ForestParams default_forest_params(std::uint64_t seed) {
  ForestParams p;
  p.seed = seed;
  return p;
}

namespace detail {

inline std::vector<int> detection_classes(const std::vector<DetectionSample>& samples) {
  std::vector<int> y;
  y.reserve(samples.size());
  for (const auto& s : samples) y.push_back(s.label);
  return y;
}

inline void require_detection_samples(const std::vector<DetectionSample>& samples) {
  std::size_t clean = 0, adv = 0;
  for (const auto& s : samples) {
    if (s.label == kCleanLabel) {
      ++clean;
    } else if (s.label == kAdversarialLabel) {
      ++adv;
    } else {
      throw ValidationError("detection label must be 0 or 1");
    }
  }
  if (clean < 10 || adv < 10) {
    throw ValidationError("detector evaluation needs at least 10 samples of each label (have " +
                          std::to_string(clean) + " clean, " + std::to_string(adv) + " adversarial)");
  }
}

inline ModelMetrics score_binary(const Forest& f, const Dataset& test) {
  std::vector<double> scores;
  std::vector<int> predicted;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto p = f.predict_proba(test.features[i]);
    scores.push_back(p[1]);
    const int yhat = p[1] > p[0] ? 1 : 0;
    predicted.push_back(yhat);
    if (yhat == 1) (test.labels[i] == 1 ? tp : fp) += 1;
  }
  return {accuracy(predicted, test.labels), auc(scores, test.labels), precision(tp, fp)};
}

}  // namespace detail

struct DetectorModels {
  MetricsReport report;
  Forest all;  ///< trained on all 17 attributes of the training fold
  Forest top;  ///< trained on the top-k columns, in ranking order
};

/// Paired 80/20 split; a forest on all 17 attributes of the training fold ranks them by Gini
/// importance, then a second forest is trained on the top-k. Both are scored on the test fold.
inline DetectorModels train_detector(const std::vector<DetectionSample>& samples, std::size_t k,
                                     std::uint64_t split_seed, ForestParams forest = default_forest_params(0)) {
  detail::require_detection_samples(samples);
  if (k == 0 || k > kAttributeCount) throw ValidationError("k must be in [1, 17]");
  const auto classes = detail::detection_classes(samples);
  const SampleSplit split = paired_split(samples, classes, split_seed);
  const Dataset train = to_dataset(samples, split.train, classes, 2);
  const Dataset test = to_dataset(samples, split.test, classes, 2);

  DetectorModels out;
  MetricsReport& r = out.report;
  r.k = k;
  r.train_size = train.size();
  r.test_size = test.size();
  out.all = train_forest(train, forest);
  const Forest& full = out.all;
  r.all = detail::score_binary(full, test);
  r.importances = full.importances;
  r.importance_fallback = full.uniform_importance_fallback;
  r.ranking = full.ranking();

  std::vector<std::size_t> cols(r.ranking.begin(), r.ranking.begin() + static_cast<std::ptrdiff_t>(k));
  for (std::size_t c : cols) r.top_k_names.emplace_back(kAttributeNames[c]);
  if (k == kAttributeCount) {
    out.top = out.all;
    r.top = r.all;
  } else {
    out.top = train_forest(train.select_features(cols), forest);
    r.top = detail::score_binary(out.top, test.select_features(cols));
  }
  return out;
}

inline MetricsReport evaluate_detector(const std::vector<DetectionSample>& samples, std::size_t k,
                                       std::uint64_t split_seed, ForestParams forest = default_forest_params(0)) {
  return train_detector(samples, k, split_seed, forest).report;
}

struct SweepRow {
  std::size_t k = 0;
  double auc = 0.0;
  std::vector<std::string> names;
};

/// Test AUC of top-k detectors for each k, with one split and one training-fold ranking.
inline std::vector<SweepRow> top_k_sweep(const std::vector<DetectionSample>& samples,
                                         const std::vector<std::size_t>& k_values, std::uint64_t seed,
                                         ForestParams forest = default_forest_params(0)) {
  detail::require_detection_samples(samples);
  const auto classes = detail::detection_classes(samples);
  const SampleSplit split = paired_split(samples, classes, seed);
  const Dataset train = to_dataset(samples, split.train, classes, 2);
  const Dataset test = to_dataset(samples, split.test, classes, 2);
  const Forest full = train_forest(train, forest);
  const auto ranking = full.ranking();

  std::vector<SweepRow> rows;
  for (std::size_t k : k_values) {
    if (k == 0 || k > kAttributeCount) throw ValidationError("k must be in [1, 17]");
    SweepRow row;
    row.k = k;
    std::vector<std::size_t> cols(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t c : cols) row.names.emplace_back(kAttributeNames[c]);
    row.auc = k == kAttributeCount ? detail::score_binary(full, test).auc
                                   : detail::score_binary(train_forest(train.select_features(cols), forest),
                                                          test.select_features(cols))
                                         .auc;
    rows.push_back(std::move(row));
  }
  return rows;
}

struct RecognitionReport {
  std::vector<std::string> classes;
  std::vector<double> aucs;  ///< macro one-vs-rest AUC per split seed
  double mean_auc = 0.0;
  double std_auc = 0.0;  ///< sample standard deviation over seeds
  std::vector<std::vector<std::size_t>> confusion;  ///< [true][predicted], summed over seeds
};

/// Multi-class forest telling attacks apart from the adversarial samples alone.
inline RecognitionReport recognize_attack(const std::vector<DetectionSample>& samples, std::uint64_t split_seed,
                                          std::size_t repeats = 10, ForestParams forest = default_forest_params(0)) {
  std::vector<AttackKind> present;
  for (const auto& s : samples) {
    if (s.label != kAdversarialLabel || !s.attack) throw ValidationError("recognition takes adversarial samples only");
    if (std::find(present.begin(), present.end(), *s.attack) == present.end()) present.push_back(*s.attack);
  }
  std::sort(present.begin(), present.end());
  if (present.size() < 2) throw ValidationError("recognition needs at least two attack classes");

  RecognitionReport r;
  for (AttackKind a : present) r.classes.emplace_back(to_string(a));
  const int nclass = static_cast<int>(present.size());
  std::vector<int> classes;
  for (const auto& s : samples) {
    classes.push_back(static_cast<int>(std::find(present.begin(), present.end(), *s.attack) - present.begin()));
  }
  r.confusion.assign(present.size(), std::vector<std::size_t>(present.size(), 0));

  for (std::size_t rep = 0; rep < repeats; ++rep) {
    const std::uint64_t seed = split_seed + rep;
    const SampleSplit split = paired_split(samples, classes, seed);
    const Dataset train = to_dataset(samples, split.train, classes, nclass);
    const Dataset test = to_dataset(samples, split.test, classes, nclass);
    ForestParams fp = forest;
    fp.seed = forest.seed + rep;
    const Forest f = train_forest(train, fp);
    std::vector<std::vector<double>> proba;
    for (std::size_t i = 0; i < test.size(); ++i) {
      proba.push_back(f.predict_proba(test.features[i]));
      const auto pred = static_cast<std::size_t>(std::max_element(proba.back().begin(), proba.back().end()) - proba.back().begin());
      r.confusion[static_cast<std::size_t>(test.labels[i])][pred] += 1;
    }
    r.aucs.push_back(macro_ovr_auc(proba, test.labels, nclass));
  }
  r.mean_auc = std::accumulate(r.aucs.begin(), r.aucs.end(), 0.0) / static_cast<double>(r.aucs.size());
  double ss = 0.0;
  for (double a : r.aucs) ss += (a - r.mean_auc) * (a - r.mean_auc);
  r.std_auc = r.aucs.size() > 1 ? std::sqrt(ss / static_cast<double>(r.aucs.size() - 1)) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Plot data and reports

struct HistogramBin {
  std::size_t attribute = 0;
  int label = 0;
  std::size_t bin = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Per attribute and label, counts over `bins` equal-width bins spanning the pooled range.
inline std::vector<HistogramBin> attribute_histograms(const std::vector<DetectionSample>& samples, std::size_t bins = 30) {
  std::vector<HistogramBin> out;
  if (samples.empty() || bins == 0) return out;
  for (std::size_t a = 0; a < kAttributeCount; ++a) {
    double lo = samples.front().attributes[a], hi = lo;
    for (const auto& s : samples) {
      lo = std::min(lo, s.attributes[a]);
      hi = std::max(hi, s.attributes[a]);
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    for (int label : {kCleanLabel, kAdversarialLabel}) {
      std::vector<std::size_t> counts(bins, 0);
      for (const auto& s : samples) {
        if (s.label != label) continue;
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((s.attributes[a] - lo) / width) : 0;
        counts[std::min(b, bins - 1)] += 1;
      }
      for (std::size_t b = 0; b < bins; ++b) {
        out.push_back({a, label, b, lo + width * static_cast<double>(b), lo + width * static_cast<double>(b + 1), counts[b]});
      }
    }
  }
  return out;
}

inline void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins) {
  const auto old = out.precision(12);
  out << "attribute,label,bin,lo,hi,count\n";
  for (const auto& b : bins) {
    out << kAttributeNames[b.attribute] << ',' << b.label << ',' << b.bin << ',' << b.lo << ',' << b.hi << ',' << b.count << '\n';
  }
  out.precision(old);
}

inline void write_importance_csv(std::ostream& out, const std::vector<double>& importances) {
  const auto old = out.precision(12);
  out << "attribute,importance\n";
  for (std::size_t i = 0; i < importances.size(); ++i) out << kAttributeNames[i] << ',' << importances[i] << '\n';
  out.precision(old);
}

/// Node ids are translated through `ids` when it is non-empty.
inline void write_samples_csv(std::ostream& out, const std::vector<DetectionSample>& samples,
                              std::span<const std::int64_t> ids = {}) {
  const auto old = out.precision(12);
  out << "node_id,label";
  for (auto name : kAttributeNames) out << ',' << name;
  out << ",attack,dataset\n";
  for (const auto& s : samples) {
    out << (ids.empty() ? static_cast<std::int64_t>(s.target) : ids[s.target]) << ',' << s.label;
    for (double v : s.attributes.values) out << ',' << v;
    out << ',' << (s.attack ? to_string(*s.attack) : std::string_view{}) << ',' << s.dataset << '\n';
  }
  out.precision(old);
}

/// Reads what write_samples_csv wrote. Node ids are kept as written.
inline std::vector<DetectionSample> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("samples file is empty", 1);
  std::vector<DetectionSample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != kAttributeCount + 4) {
      throw ParseError("expected " + std::to_string(kAttributeCount + 4) + " columns, got " + std::to_string(cells.size()),
                       line_no);
    }
    DetectionSample s;
    try {
      s.target = static_cast<NodeId>(std::stoll(cells[0]));
      s.label = std::stoi(cells[1]);
      for (std::size_t a = 0; a < kAttributeCount; ++a) s.attributes[a] = std::stod(cells[2 + a]);
    } catch (const std::exception&) {
      throw ParseError("malformed number", line_no);
    }
    if (s.label != kCleanLabel && s.label != kAdversarialLabel) throw ParseError("label must be 0 or 1", line_no);
    const std::string& attack = cells[kAttributeCount + 2];
    if (!attack.empty()) {
      s.attack = parse_attack(attack);
      if (!s.attack) throw ParseError("unknown attack \"" + attack + "\"", line_no);
    }
    s.dataset = cells[kAttributeCount + 3];
    out.push_back(std::move(s));
  }
  return out;
}

inline nlohmann::json to_json(const ModelMetrics& m) {
  return {{"acc", m.acc}, {"auc", m.auc}, {"precision", m.precision ? nlohmann::json(*m.precision) : nlohmann::json()}};
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json imp = nlohmann::json::object();
  for (std::size_t i = 0; i < r.importances.size(); ++i) imp[std::string(kAttributeNames[i])] = r.importances[i];
  nlohmann::json gains = nlohmann::json::object();
  gains["acc"] = r.top.acc > 0 ? nlohmann::json(gain(r.all.acc, r.top.acc)) : nlohmann::json();
  gains["auc"] = r.top.auc > 0 ? nlohmann::json(gain(r.all.auc, r.top.auc)) : nlohmann::json();
  gains["precision"] = (r.top.precision && r.all.precision && *r.top.precision > 0)
                           ? nlohmann::json(gain(*r.all.precision, *r.top.precision))
                           : nlohmann::json();
  return {{"k", r.k},
          {"top_k", to_json(r.top)},
          {"all", to_json(r.all)},
          {"gain_percent", gains},
          {"top_k_names", r.top_k_names},
          {"importances", imp},
          {"importance_fallback", r.importance_fallback},
          {"train_size", r.train_size},
          {"test_size", r.test_size}};
}

inline nlohmann::json to_json(const RecognitionReport& r) {
  return {{"classes", r.classes}, {"aucs", r.aucs}, {"mean_auc", r.mean_auc}, {"std_auc", r.std_auc}, {"confusion", r.confusion}};
}

}  // namespace advgraph
