// Dataset ingestion, splitting, standardization, and synthetic generators.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "regbayes/dense.hpp"
#include "regbayes/ibp.hpp"
#include "regbayes/rng.hpp"

namespace regbayes {

// Sorted (0-based column, value) pairs; high-dimensional text rows stay cheap.
using SparseRow = std::vector<std::pair<int, double>>;

inline double row_dot(const SparseRow& r, const std::vector<double>& w) {
  double s = 0.0;
  for (const auto& [j, v] : r) s += v * w[static_cast<std::size_t>(j)];
  return s;
}

inline double row_sq_norm(const SparseRow& r) {
  double s = 0.0;
  for (const auto& [j, v] : r) s += v * v;
  return s;
}

inline std::vector<double> row_dense(const SparseRow& r, int n_features) {
  std::vector<double> out(static_cast<std::size_t>(n_features), 0.0);
  for (const auto& [j, v] : r) out[static_cast<std::size_t>(j)] = v;
  return out;
}

// Single-label multi-way data.  Labels are 1..n_labels (0 = absent), with the
// original numeric label kept in label_values so files round-trip exactly.
struct Dataset {
  int n_features = 0;
  int n_labels = 0;
  std::vector<SparseRow> rows;
  std::vector<int> labels;
  std::vector<double> label_values;
  std::vector<std::string> feature_names;
  std::vector<int> train_idx, test_idx;

  int n_rows() const { return static_cast<int>(rows.size()); }
};

// Multi-task binary data over one shared design matrix.  y is n_rows ×
// n_tasks in {-1, 0, +1} with 0 meaning the cell is unobserved; per-task
// train/test index sets only ever contain observed cells.
struct TaskSet {
  int n_features = 0;
  std::vector<SparseRow> rows;
  Matrix y;
  std::vector<std::string> task_names;
  std::vector<std::string> feature_names;
  std::vector<std::vector<int>> train_idx, test_idx;

  int n_rows() const { return static_cast<int>(rows.size()); }
  int n_tasks() const { return static_cast<int>(task_names.size()); }
};

inline Matrix dense_matrix(const std::vector<SparseRow>& rows, int n_features) {
  Matrix x(static_cast<int>(rows.size()), n_features);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& [j, v] : rows[i]) x(static_cast<int>(i), j) = v;
  return x;
}

namespace detail {

inline std::runtime_error parse_error(const std::string& path, int line,
                                      const std::string& what) {
  return std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

inline double parse_num(const std::string& tok, const std::string& path,
                        int line) {
  double v = 0.0;
  std::size_t pos = 0;
  bool ok = true;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    ok = false;
  }
  if (!ok || pos != tok.size() || !std::isfinite(v))
    throw parse_error(path, line, "bad number '" + tok + "'");
  return v;
}

inline long parse_int(const std::string& tok, const std::string& path,
                      int line) {
  long v = 0;
  std::size_t pos = 0;
  bool ok = true;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    ok = false;
  }
  if (!ok || pos != tok.size())
    throw parse_error(path, line, "bad integer '" + tok + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline const char* fmt_g17(char (&buf)[64], double v) {
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array()) throw std::runtime_error("matrix field is not a list");
  const int r = static_cast<int>(rows.size());
  const int c = r == 0 ? 0 : static_cast<int>(rows.at(0).size());
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<int>(row.size()) != c)
      throw std::runtime_error("ragged matrix field");
    for (int j = 0; j < c; ++j)
      m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

}  // namespace detail

// Lines "label idx:val idx:val ..." with 1-based strictly positive indices.
// Numeric labels are mapped to 1..L preserving their numeric order.
inline Dataset load_libsvm(const std::string& path) {
  std::ifstream in = detail::open_in(path);
  Dataset ds;
  std::vector<double> raw_labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(detail::strip_cr(line));
    std::string tok;
    if (!(ss >> tok)) continue;  // blank line
    raw_labels.push_back(detail::parse_num(tok, path, lineno));
    SparseRow row;
    while (ss >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw detail::parse_error(path, lineno,
                                  "expected idx:val, got '" + tok + "'");
      const long idx = detail::parse_int(tok.substr(0, colon), path, lineno);
      if (idx < 1)
        throw detail::parse_error(path, lineno,
                                  "feature index must be >= 1, got '" + tok +
                                      "'");
      const double val = detail::parse_num(tok.substr(colon + 1), path, lineno);
      row.emplace_back(static_cast<int>(idx) - 1, val);
    }
    std::sort(row.begin(), row.end());
    for (std::size_t i = 1; i < row.size(); ++i)
      if (row[i].first == row[i - 1].first)
        throw detail::parse_error(
            path, lineno,
            "duplicate feature index " + std::to_string(row[i].first + 1));
    if (!row.empty())
      ds.n_features = std::max(ds.n_features, row.back().first + 1);
    ds.rows.push_back(std::move(row));
  }
  ds.label_values = raw_labels;
  std::sort(ds.label_values.begin(), ds.label_values.end());
  ds.label_values.erase(
      std::unique(ds.label_values.begin(), ds.label_values.end()),
      ds.label_values.end());
  ds.n_labels = static_cast<int>(ds.label_values.size());
  ds.labels.reserve(raw_labels.size());
  for (double raw : raw_labels) {
    const auto it =
        std::lower_bound(ds.label_values.begin(), ds.label_values.end(), raw);
    ds.labels.push_back(static_cast<int>(it - ds.label_values.begin()) + 1);
  }
  return ds;
}

inline void save_libsvm(const Dataset& ds, const std::string& path) {
  std::ofstream out = detail::open_out(path);
  char buf[64];
  for (int i = 0; i < ds.n_rows(); ++i) {
    const int lab = ds.labels[static_cast<std::size_t>(i)];
    if (lab < 1 || lab > ds.n_labels)
      throw std::runtime_error("row " + std::to_string(i + 1) +
                               " has no label; cannot write");
    out << detail::fmt_g17(buf, ds.label_values[static_cast<std::size_t>(lab) -
                                                1]);
    for (const auto& [j, v] : ds.rows[static_cast<std::size_t>(i)])
      out << ' ' << (j + 1) << ':' << detail::fmt_g17(buf, v);
    out << '\n';
  }
}

// CSV whose header lists feature columns first, then "label:<name>" columns.
// Label cells hold 0/1 (stored as -1/+1) or are empty (unobserved); each
// task's training pool is the set of rows where its label is observed.
inline TaskSet load_multilabel_csv(const std::string& path) {
  std::ifstream in = detail::open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const std::vector<std::string> header =
      detail::split_csv_line(detail::strip_cr(line));
  TaskSet ts;
  const std::string prefix = "label:";
  bool in_labels = false;
  for (const std::string& cell : header) {
    if (cell.rfind(prefix, 0) == 0) {
      in_labels = true;
      ts.task_names.push_back(cell.substr(prefix.size()));
    } else if (in_labels) {
      throw detail::parse_error(path, 1,
                                "feature column '" + cell +
                                    "' after label columns");
    } else {
      ts.feature_names.push_back(cell);
    }
  }
  if (ts.task_names.empty())
    throw detail::parse_error(path, 1, "no label: columns in header");
  if (ts.feature_names.empty())
    throw detail::parse_error(path, 1, "no feature columns in header");
  const int d = static_cast<int>(ts.feature_names.size());
  const int m = ts.n_tasks();
  ts.n_features = d;

  std::vector<std::vector<double>> ycols(static_cast<std::size_t>(m));
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = detail::strip_cr(line);
    if (stripped.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(stripped);
    if (static_cast<int>(cells.size()) != d + m)
      throw detail::parse_error(
          path, lineno,
          "row has " + std::to_string(cells.size()) + " columns, expected " +
              std::to_string(d + m));
    SparseRow row;
    for (int j = 0; j < d; ++j) {
      const double v =
          detail::parse_num(cells[static_cast<std::size_t>(j)], path, lineno);
      if (v != 0.0) row.emplace_back(j, v);
    }
    ts.rows.push_back(std::move(row));
    for (int t = 0; t < m; ++t) {
      const std::string& cell = cells[static_cast<std::size_t>(d + t)];
      double y = 0.0;
      if (!cell.empty()) {
        const double v = detail::parse_num(cell, path, lineno);
        if (v == 0.0 || v == -1.0)
          y = -1.0;
        else if (v == 1.0)
          y = 1.0;
        else
          throw detail::parse_error(path, lineno,
                                    "label cell must be 0, 1, or empty; got '" +
                                        cell + "'");
      }
      ycols[static_cast<std::size_t>(t)].push_back(y);
    }
  }
  const int n = ts.n_rows();
  ts.y = Matrix(n, m);
  ts.train_idx.assign(static_cast<std::size_t>(m), {});
  ts.test_idx.assign(static_cast<std::size_t>(m), {});
  for (int t = 0; t < m; ++t)
    for (int i = 0; i < n; ++i) {
      ts.y(i, t) = ycols[static_cast<std::size_t>(t)][static_cast<std::size_t>(
          i)];
      if (ts.y(i, t) != 0.0) ts.train_idx[static_cast<std::size_t>(t)].push_back(i);
    }
  return ts;
}

inline void save_multilabel_csv(const TaskSet& ts, const std::string& path) {
  std::ofstream out = detail::open_out(path);
  char buf[64];
  for (int j = 0; j < ts.n_features; ++j) {
    if (j) out << ',';
    out << (j < static_cast<int>(ts.feature_names.size())
                ? ts.feature_names[static_cast<std::size_t>(j)]
                : "f" + std::to_string(j + 1));
  }
  for (const std::string& name : ts.task_names) out << ",label:" << name;
  out << '\n';
  for (int i = 0; i < ts.n_rows(); ++i) {
    const std::vector<double> dense =
        row_dense(ts.rows[static_cast<std::size_t>(i)], ts.n_features);
    for (int j = 0; j < ts.n_features; ++j) {
      if (j) out << ',';
      out << detail::fmt_g17(buf, dense[static_cast<std::size_t>(j)]);
    }
    for (int t = 0; t < ts.n_tasks(); ++t) {
      out << ',';
      if (ts.y(i, t) > 0.0)
        out << '1';
      else if (ts.y(i, t) < 0.0)
        out << '0';
    }
    out << '\n';
  }
}

namespace detail {

inline void check_split(int n_rows, const std::vector<int>& train,
                        const std::vector<int>& test) {
  std::vector<char> seen(static_cast<std::size_t>(n_rows), 0);
  const auto visit = [&](const std::vector<int>& idx, const char* side) {
    for (int i : idx) {
      if (i < 0 || i >= n_rows)
        throw std::invalid_argument(std::string(side) + " index " +
                                    std::to_string(i) + " out of range");
      if (seen[static_cast<std::size_t>(i)]++)
        throw std::invalid_argument("row " + std::to_string(i) +
                                    " appears twice in the split");
    }
  };
  visit(train, "train");
  visit(test, "test");
}

}  // namespace detail

// Seeded Fisher-Yates shuffle; the first round(frac*n) rows train.
inline std::pair<std::vector<int>, std::vector<int>> make_split(
    int n_rows, double train_fraction, std::uint64_t seed) {
  if (n_rows < 1) throw std::invalid_argument("make_split: need n_rows >= 1");
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
    throw std::invalid_argument("make_split: train fraction must be in [0,1]");
  std::vector<int> perm(static_cast<std::size_t>(n_rows));
  for (int i = 0; i < n_rows; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  for (int i = n_rows - 1; i > 0; --i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(rng.below(i + 1))]);
  const int n_train =
      static_cast<int>(std::llround(train_fraction * n_rows));
  std::vector<int> train(perm.begin(), perm.begin() + n_train);
  std::vector<int> test(perm.begin() + n_train, perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

inline void save_split(const std::vector<int>& train,
                       const std::vector<int>& test, const std::string& path) {
  nlohmann::json j;
  j["train"] = train;
  j["test"] = test;
  std::ofstream out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

inline std::pair<std::vector<int>, std::vector<int>> load_split(
    const std::string& path) {
  std::ifstream in = detail::open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!j.contains("train") || !j.contains("test"))
    throw std::runtime_error(path + ": split file needs train and test lists");
  try {
    return {j["train"].get<std::vector<int>>(),
            j["test"].get<std::vector<int>>()};
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

inline void apply_split(Dataset& ds, std::vector<int> train,
                        std::vector<int> test) {
  detail::check_split(ds.n_rows(), train, test);
  for (int i : train)
    if (ds.labels[static_cast<std::size_t>(i)] == 0)
      throw std::invalid_argument("train row " + std::to_string(i) +
                                  " has no label");
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  ds.train_idx = std::move(train);
  ds.test_idx = std::move(test);
}

// Per-task sets are the given rows restricted to observed labels.
inline void apply_split(TaskSet& ts, const std::vector<int>& train,
                        const std::vector<int>& test) {
  detail::check_split(ts.n_rows(), train, test);
  const int m = ts.n_tasks();
  ts.train_idx.assign(static_cast<std::size_t>(m), {});
  ts.test_idx.assign(static_cast<std::size_t>(m), {});
  for (int t = 0; t < m; ++t) {
    for (int i : train)
      if (ts.y(i, t) != 0.0) ts.train_idx[static_cast<std::size_t>(t)].push_back(i);
    for (int i : test)
      if (ts.y(i, t) != 0.0) ts.test_idx[static_cast<std::size_t>(t)].push_back(i);
    std::sort(ts.train_idx[static_cast<std::size_t>(t)].begin(),
              ts.train_idx[static_cast<std::size_t>(t)].end());
    std::sort(ts.test_idx[static_cast<std::size_t>(t)].begin(),
              ts.test_idx[static_cast<std::size_t>(t)].end());
  }
}

namespace detail {

// Center/scale all rows using population statistics of the stat rows only
// (train rows when a split exists).  Features with negligible variance are
// left untouched so indicator columns and padding survive.
inline void standardize_rows(std::vector<SparseRow>& rows, int n_features,
                             const std::vector<int>& stat_rows) {
  std::vector<int> stats = stat_rows;
  if (stats.empty()) {
    stats.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      stats[i] = static_cast<int>(i);
  }
  const double n = static_cast<double>(stats.size());
  std::vector<double> sum(static_cast<std::size_t>(n_features), 0.0);
  std::vector<double> sumsq(static_cast<std::size_t>(n_features), 0.0);
  for (int i : stats)
    for (const auto& [j, v] : rows[static_cast<std::size_t>(i)]) {
      sum[static_cast<std::size_t>(j)] += v;
      sumsq[static_cast<std::size_t>(j)] += v * v;
    }
  std::vector<double> mean(static_cast<std::size_t>(n_features));
  std::vector<double> inv_sd(static_cast<std::size_t>(n_features), 0.0);
  for (int j = 0; j < n_features; ++j) {
    const std::size_t sj = static_cast<std::size_t>(j);
    mean[sj] = sum[sj] / n;
    const double var = std::max(0.0, sumsq[sj] / n - mean[sj] * mean[sj]);
    if (var >= 1e-12) inv_sd[sj] = 1.0 / std::sqrt(var);
  }
  for (SparseRow& row : rows) {
    std::vector<double> dense = row_dense(row, n_features);
    row.clear();
    for (int j = 0; j < n_features; ++j) {
      const std::size_t sj = static_cast<std::size_t>(j);
      const double v = inv_sd[sj] > 0.0 ? (dense[sj] - mean[sj]) * inv_sd[sj]
                                        : dense[sj];
      if (v != 0.0) row.emplace_back(j, v);
    }
  }
}

}  // namespace detail

inline void standardize(Dataset& ds) {
  detail::standardize_rows(ds.rows, ds.n_features, ds.train_idx);
}

inline void standardize(TaskSet& ts) {
  std::set<int> pool;
  for (const std::vector<int>& idx : ts.train_idx)
    pool.insert(idx.begin(), idx.end());
  detail::standardize_rows(ts.rows, ts.n_features,
                           std::vector<int>(pool.begin(), pool.end()));
}

struct SynthParams {
  int n_rows = 100;
  int n_features = 10;
  int k_true = 3;
  double alpha = 1.0;
  double noise_sd = 0.1;
  int n_labels = 2;  // multi-way mode
  int n_tasks = 2;   // multi-task mode
  std::uint64_t seed = 0;
};

// Ground truth behind a synthetic draw, for separability checks.
struct SynthTruth {
  Matrix z;    // latent binary features
  Matrix w;    // Gaussian loadings
  Matrix eta;  // labeling weights (one row per class or task)
};

namespace detail {

inline void check_synth(const SynthParams& p, bool multitask) {
  if (p.n_rows < 1 || p.n_features < 1 || p.k_true < 1)
    throw std::invalid_argument("synth: sizes must be positive");
  if (!(p.alpha > 0.0)) throw std::invalid_argument("synth: alpha must be > 0");
  if (!(p.noise_sd >= 0.0))
    throw std::invalid_argument("synth: noise_sd must be >= 0");
  if (multitask ? p.n_tasks < 1 : p.n_labels < 2)
    throw std::invalid_argument(multitask ? "synth: need n_tasks >= 1"
                                          : "synth: need n_labels >= 2");
}

// Left-pad an IBP draw (whose width is data-dependent) to exactly k columns.
inline Matrix padded_ibp(double alpha, int n_rows, int k, Rng& rng) {
  const Matrix raw = sample_ibp(alpha, n_rows, rng, k);
  Matrix z(n_rows, k);
  for (int i = 0; i < n_rows; ++i)
    for (int j = 0; j < raw.cols; ++j) z(i, j) = raw(i, j);
  return z;
}

inline std::vector<SparseRow> noisy_product(const Matrix& z, const Matrix& w,
                                            double noise_sd, Rng& rng) {
  std::vector<SparseRow> rows(static_cast<std::size_t>(z.rows));
  for (int i = 0; i < z.rows; ++i) {
    SparseRow& row = rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < w.cols; ++j) {
      double v = 0.0;
      for (int k = 0; k < z.cols; ++k) v += z(i, k) * w(k, j);
      if (noise_sd > 0.0) v += rng.normal(0.0, noise_sd);
      if (v != 0.0) row.emplace_back(j, v);
    }
  }
  return rows;
}

}  // namespace detail

// Latent-feature classification data: Z ~ truncated IBP, W ~ N(0,1), X = ZW +
// noise; labels are the argmax of eta * z.  eta is redrawn (up to a try cap,
// then best-so-far) until every distinct nonzero z pattern wins its argmax by
// a clear gap, so the labels are linearly separable in the true latent space.
// All-zero rows score 0 for every class and take class 1.
inline Dataset synth_multiclass(const SynthParams& p,
                                SynthTruth* truth = nullptr) {
  detail::check_synth(p, /*multitask=*/false);
  Rng rng(p.seed);
  const Matrix z = detail::padded_ibp(p.alpha, p.n_rows, p.k_true, rng);
  Matrix w(p.k_true, p.n_features);
  for (double& v : w.data) v = rng.normal();
  Dataset ds;
  ds.n_features = p.n_features;
  ds.rows = detail::noisy_product(z, w, p.noise_sd, rng);

  std::set<std::vector<char>> patterns;
  for (int i = 0; i < p.n_rows; ++i) {
    std::vector<char> pat(static_cast<std::size_t>(p.k_true));
    bool any = false;
    for (int k = 0; k < p.k_true; ++k) {
      pat[static_cast<std::size_t>(k)] = z(i, k) != 0.0;
      any = any || pat[static_cast<std::size_t>(k)];
    }
    if (any) patterns.insert(std::move(pat));
  }
  const double want_gap = 0.25;
  Matrix eta(p.n_labels, p.k_true);
  Matrix best_eta = eta;
  double best_gap = -1.0;
  for (int attempt = 0; attempt < 500; ++attempt) {
    for (double& v : eta.data) v = rng.normal();
    double gap = std::numeric_limits<double>::infinity();
    for (const std::vector<char>& pat : patterns) {
      double top = -std::numeric_limits<double>::infinity(), second = top;
      for (int y = 0; y < p.n_labels; ++y) {
        double s = 0.0;
        for (int k = 0; k < p.k_true; ++k)
          if (pat[static_cast<std::size_t>(k)]) s += eta(y, k);
        if (s > top) {
          second = top;
          top = s;
        } else if (s > second) {
          second = s;
        }
      }
      gap = std::min(gap, top - second);
    }
    if (gap > best_gap) {
      best_gap = gap;
      best_eta = eta;
    }
    if (best_gap >= want_gap) break;
  }
  ds.labels.resize(static_cast<std::size_t>(p.n_rows));
  for (int i = 0; i < p.n_rows; ++i) {
    int arg = 0;
    double top = -std::numeric_limits<double>::infinity();
    for (int y = 0; y < p.n_labels; ++y) {
      double s = 0.0;
      for (int k = 0; k < p.k_true; ++k) s += best_eta(y, k) * z(i, k);
      if (s > top) {
        top = s;
        arg = y;
      }
    }
    ds.labels[static_cast<std::size_t>(i)] = arg + 1;
  }
  ds.n_labels = p.n_labels;
  ds.label_values.resize(static_cast<std::size_t>(p.n_labels));
  for (int y = 0; y < p.n_labels; ++y)
    ds.label_values[static_cast<std::size_t>(y)] = y + 1;
  ds.train_idx.resize(static_cast<std::size_t>(p.n_rows));
  for (int i = 0; i < p.n_rows; ++i)
    ds.train_idx[static_cast<std::size_t>(i)] = i;
  if (truth) {
    truth->z = z;
    truth->w = w;
    truth->eta = best_eta;
  }
  return ds;
}

// Multi-task data on a shared latent projection: Z is n_features × k_true IBP
// over feature dimensions, each example has w_n ~ N(0,1) with x_n = Z w_n +
// noise, and task m labels by the sign of eta_m' Z' x_n.  Each task's eta_m is
// redrawn until all examples clear a sign margin (cap, then best-so-far).
inline TaskSet synth_multitask(const SynthParams& p,
                               SynthTruth* truth = nullptr) {
  detail::check_synth(p, /*multitask=*/true);
  Rng rng(p.seed);
  const Matrix z = detail::padded_ibp(p.alpha, p.n_features, p.k_true, rng);
  Matrix w(p.n_rows, p.k_true);
  for (double& v : w.data) v = rng.normal();
  TaskSet ts;
  ts.n_features = p.n_features;
  {
    // x_n = Z w_n + noise, i.e. rows of W Z'.
    Matrix zt(p.k_true, p.n_features);
    for (int j = 0; j < p.n_features; ++j)
      for (int k = 0; k < p.k_true; ++k) zt(k, j) = z(j, k);
    ts.rows = detail::noisy_product(w, zt, p.noise_sd, rng);
  }
  // Latent representation the labels live in: v_n = Z' x_n.
  Matrix v(p.n_rows, p.k_true);
  for (int i = 0; i < p.n_rows; ++i) {
    const std::vector<double> x =
        row_dense(ts.rows[static_cast<std::size_t>(i)], p.n_features);
    for (int k = 0; k < p.k_true; ++k) {
      double s = 0.0;
      for (int j = 0; j < p.n_features; ++j)
        s += z(j, k) * x[static_cast<std::size_t>(j)];
      v(i, k) = s;
    }
  }
  ts.y = Matrix(p.n_rows, p.n_tasks);
  Matrix eta(p.n_tasks, p.k_true);
  const double want_margin = 0.5;
  for (int t = 0; t < p.n_tasks; ++t) {
    std::vector<double> best(static_cast<std::size_t>(p.k_true), 0.0);
    double best_margin = -1.0;
    for (int attempt = 0; attempt < 500; ++attempt) {
      std::vector<double> cand(static_cast<std::size_t>(p.k_true));
      for (double& c : cand) c = rng.normal();
      double margin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < p.n_rows; ++i) {
        double s = 0.0;
        for (int k = 0; k < p.k_true; ++k)
          s += cand[static_cast<std::size_t>(k)] * v(i, k);
        margin = std::min(margin, std::fabs(s));
      }
      if (margin > best_margin) {
        best_margin = margin;
        best = cand;
      }
      if (best_margin >= want_margin) break;
    }
    for (int k = 0; k < p.k_true; ++k)
      eta(t, k) = best[static_cast<std::size_t>(k)];
    for (int i = 0; i < p.n_rows; ++i) {
      double s = 0.0;
      for (int k = 0; k < p.k_true; ++k) s += eta(t, k) * v(i, k);
      ts.y(i, t) = s < 0.0 ? -1.0 : 1.0;
    }
    ts.task_names.push_back("t" + std::to_string(t + 1));
  }
  ts.train_idx.assign(static_cast<std::size_t>(p.n_tasks), {});
  ts.test_idx.assign(static_cast<std::size_t>(p.n_tasks), {});
  for (int t = 0; t < p.n_tasks; ++t) {
    ts.train_idx[static_cast<std::size_t>(t)].resize(
        static_cast<std::size_t>(p.n_rows));
    for (int i = 0; i < p.n_rows; ++i)
      ts.train_idx[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] =
          i;
  }
  if (truth) {
    truth->z = z;
    truth->w = w;
    truth->eta = eta;
  }
  return ts;
}

inline void save_truth(const SynthTruth& t, const std::string& path) {
  nlohmann::json j;
  j["z"] = detail::matrix_to_json(t.z);
  j["w"] = detail::matrix_to_json(t.w);
  j["eta"] = detail::matrix_to_json(t.eta);
  std::ofstream out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

inline SynthTruth load_truth(const std::string& path) {
  std::ifstream in = detail::open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  SynthTruth t;
  t.z = detail::matrix_from_json(j.at("z"));
  t.w = detail::matrix_from_json(j.at("w"));
  t.eta = detail::matrix_from_json(j.at("eta"));
  return t;
}

}  // namespace regbayes
