// Classification metrics: accuracy, macro/micro F1, explained variance.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "regbayes/dense.hpp"

namespace regbayes {

inline double accuracy(const std::vector<int>& pred,
                       const std::vector<int>& truth) {
  if (pred.empty()) throw std::invalid_argument("accuracy: empty input");
  if (pred.size() != truth.size())
    throw std::invalid_argument("accuracy: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

// Per-task confusion counts and the F1 they induce.
struct TaskScores {
  std::string name;
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double f1 = 0.0;
};

namespace detail {

// F1 = 2P R / (P + R) = 2tp / (2tp + fp + fn); zero denominator scores 0.
inline double f1_from_counts(long tp, long fp, long fn) {
  const long denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) /
                                static_cast<double>(denom);
}

}  // namespace detail

// Column t of each matrix is one binary task with entries in {-1,+1}; truth
// cells equal to 0 are unobserved and skipped.  Returns (macro, micro):
// macro averages per-task F1, micro pools the confusion counts first.
inline std::pair<double, double> f1_scores(
    const Matrix& pred, const Matrix& truth,
    std::vector<TaskScores>* per_task = nullptr) {
  if (!pred.same_shape(truth))
    throw std::invalid_argument("f1_scores: shape mismatch");
  if (pred.rows == 0 || pred.cols == 0)
    throw std::invalid_argument("f1_scores: empty input");
  long tp = 0, fp = 0, fn = 0;
  double macro_sum = 0.0;
  if (per_task) per_task->clear();
  for (int t = 0; t < pred.cols; ++t) {
    TaskScores s;
    for (int i = 0; i < pred.rows; ++i) {
      const double yt = truth(i, t);
      if (yt == 0.0) continue;
      const double yp = pred(i, t);
      if (yp != 1.0 && yp != -1.0)
        throw std::invalid_argument("f1_scores: predictions must be +1/-1");
      if (yt != 1.0 && yt != -1.0)
        throw std::invalid_argument("f1_scores: truth must be +1/-1 or 0");
      if (yp > 0.0)
        (yt > 0.0 ? s.tp : s.fp)++;
      else
        (yt > 0.0 ? s.fn : s.tn)++;
    }
    s.f1 = detail::f1_from_counts(s.tp, s.fp, s.fn);
    macro_sum += s.f1;
    tp += s.tp;
    fp += s.fp;
    fn += s.fn;
    if (per_task) per_task->push_back(s);
  }
  return {macro_sum / pred.cols, detail::f1_from_counts(tp, fp, fn)};
}

// One-vs-rest reduction of a multi-way problem: class c becomes a binary
// task (+1 when the label is c), then macro/micro as above.
inline std::pair<double, double> f1_one_vs_rest(
    const std::vector<int>& pred, const std::vector<int>& truth, int n_labels,
    std::vector<TaskScores>* per_class = nullptr) {
  if (pred.empty()) throw std::invalid_argument("f1_one_vs_rest: empty input");
  if (pred.size() != truth.size())
    throw std::invalid_argument("f1_one_vs_rest: length mismatch");
  if (n_labels < 1)
    throw std::invalid_argument("f1_one_vs_rest: need n_labels >= 1");
  const int n = static_cast<int>(pred.size());
  Matrix p(n, n_labels, -1.0), t(n, n_labels, -1.0);
  for (int i = 0; i < n; ++i) {
    const int yp = pred[static_cast<std::size_t>(i)];
    const int yt = truth[static_cast<std::size_t>(i)];
    if (yp < 1 || yp > n_labels || yt < 1 || yt > n_labels)
      throw std::invalid_argument("f1_one_vs_rest: label out of 1..L");
    p(i, yp - 1) = 1.0;
    t(i, yt - 1) = 1.0;
  }
  return f1_scores(p, t, per_class);
}

// 100 * (1 - SSE / total variance); negative when worse than the mean.
inline double explained_variance(const std::vector<double>& pred,
                                 const std::vector<double>& truth) {
  if (pred.empty())
    throw std::invalid_argument("explained_variance: empty input");
  if (pred.size() != truth.size())
    throw std::invalid_argument("explained_variance: length mismatch");
  double mean = 0.0;
  for (double y : truth) mean += y;
  mean /= static_cast<double>(truth.size());
  double total = 0.0, sse = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    total += (truth[i] - mean) * (truth[i] - mean);
    sse += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  }
  if (total <= 0.0)
    throw std::invalid_argument("explained_variance: zero-variance truth");
  return 100.0 * (1.0 - sse / total);
}

struct EvalReport {
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double f1_micro = 0.0;
  std::optional<double> explained_variance_pct;
  std::vector<TaskScores> per_task;
};

}  // namespace regbayes
