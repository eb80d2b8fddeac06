#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "advgraph/error.hpp"

namespace advgraph {

/// Mann-Whitney AUC: (concordant + 0.5 * tied) / (#pos * #neg). Labels are 0/1 (any nonzero
/// counts as positive). Counting is done in integers, so the result is exact up to the final
/// division.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("auc: score/label length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::uint64_t pos = 0, neg = 0, concordant = 0, tied = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::uint64_t gp = 0, gn = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] != 0 ? gp : gn) += 1;
      ++j;
    }
    concordant += gp * neg;  // positives above every negative seen so far
    tied += gp * gn;
    pos += gp;
    neg += gn;
    i = j;
  }
  if (pos == 0 || neg == 0) throw ValidationError("auc needs both positive and negative labels");
  return static_cast<double>(2 * concordant + tied) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

/// tp / (tp + fp); empty when nothing was predicted positive.
inline std::optional<double> precision(std::uint64_t tp, std::uint64_t fp) {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

/// Relative improvement of the all-attribute model over the top-k model, in percent.
inline double gain(double m_all, double m_top) {
  if (!(m_top > 0.0)) throw ValidationError("gain needs a positive top-k metric");
  return (m_all - m_top) / m_top * 100.0;
}

inline double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty()) throw ValidationError("accuracy: bad input sizes");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

/// Unweighted mean of one-vs-rest AUCs. `proba[i][c]` is the score of sample i for class c.
/// Classes absent from `truth` are skipped.
inline double macro_ovr_auc(const std::vector<std::vector<double>>& proba, std::span<const int> truth, int class_count) {
  double sum = 0.0;
  int used = 0;
  std::vector<double> scores(truth.size());
  std::vector<int> bin(truth.size());
  for (int c = 0; c < class_count; ++c) {
    std::size_t npos = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      scores[i] = proba[i][static_cast<std::size_t>(c)];
      bin[i] = truth[i] == c;
      npos += static_cast<std::size_t>(bin[i]);
    }
    if (npos == 0 || npos == truth.size()) continue;
    sum += auc(scores, bin);
    ++used;
  }
  if (used == 0) throw ValidationError("macro AUC needs at least two classes present");
  return sum / used;
}

}  // namespace advgraph
