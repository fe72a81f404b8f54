// Tests for dataset loading, splitting, standardization, and synthesis.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "regbayes/data.hpp"

using regbayes::Dataset;
using regbayes::Matrix;
using regbayes::SynthParams;
using regbayes::SynthTruth;
using regbayes::TaskSet;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("regbayes_" + name))
      .string();
}

std::string write_file(const std::string& name, const std::string& content) {
  const std::string path = tmp_path(name);
  std::ofstream out(path);
  out << content;
  return path;
}

bool same_rows(const std::vector<regbayes::SparseRow>& a,
               const std::vector<regbayes::SparseRow>& b) {
  return a == b;
}

}  // namespace

TEST_CASE("sparse feature lines parse with labels in numeric order") {
  const std::string path = write_file(
      "basic.libsvm", "2 1:0.5 4:-1\n3 2:1.25\n1\n-1 1:7\n");
  const Dataset ds = regbayes::load_libsvm(path);
  REQUIRE(ds.n_rows() == 4);
  CHECK(ds.n_features == 4);
  CHECK(ds.rows[0] == regbayes::SparseRow{{0, 0.5}, {3, -1.0}});
  CHECK(ds.rows[1] == regbayes::SparseRow{{1, 1.25}});
  CHECK(ds.rows[2].empty());  // bare label, all-zero row
  // Raw labels 2, 3, 1, -1 map onto 1..4 sorted by numeric value.
  CHECK(ds.label_values == std::vector<double>{-1.0, 1.0, 2.0, 3.0});
  CHECK(ds.labels == std::vector<int>{3, 4, 2, 1});
  CHECK(ds.n_labels == 4);
  CHECK(ds.train_idx.empty());
}

TEST_CASE("sparse loader reports malformed lines by number") {
  const auto load = [](const std::string& name, const std::string& text) {
    return regbayes::load_libsvm(write_file(name, text));
  };
  const auto message = [](const auto& fn) {
    try {
      fn();
    } catch (const std::runtime_error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK_THAT(message([&] { load("bad1.libsvm", "1 1:0.5\n2 oops\n"); }),
             Catch::Matchers::ContainsSubstring(":2:"));
  CHECK_THAT(message([&] { load("bad2.libsvm", "1 3:1 3:2\n"); }),
             Catch::Matchers::ContainsSubstring("duplicate feature index 3"));
  CHECK_THAT(message([&] { load("bad3.libsvm", "1 0:1\n"); }),
             Catch::Matchers::ContainsSubstring(":1:"));
  CHECK_THAT(message([&] { load("bad4.libsvm", "abc 1:1\n"); }),
             Catch::Matchers::ContainsSubstring("bad number 'abc'"));
  CHECK_THAT(message([&] { load("bad5.libsvm", "1 2:xyz\n"); }),
             Catch::Matchers::ContainsSubstring("bad number 'xyz'"));
  CHECK_THROWS_AS(regbayes::load_libsvm(tmp_path("does_not_exist.libsvm")),
                  std::runtime_error);
}

TEST_CASE("sparse loader tolerates blank lines and CR line endings") {
  const std::string path =
      write_file("crlf.libsvm", "1 1:2\r\n\r\n2 2:3\r\n");
  const Dataset ds = regbayes::load_libsvm(path);
  REQUIRE(ds.n_rows() == 2);
  CHECK(ds.rows[0] == regbayes::SparseRow{{0, 2.0}});
  CHECK(ds.rows[1] == regbayes::SparseRow{{1, 3.0}});
}

TEST_CASE("sparse write then read reproduces the matrix exactly") {
  Dataset ds;
  ds.n_features = 5;
  ds.n_labels = 2;
  ds.label_values = {-1.0, 2.5};
  ds.rows = {{{0, 0.1}, {4, -1.0 / 3.0}}, {}, {{2, 1e-17}, {3, 12345.678}}};
  ds.labels = {2, 1, 2};
  const std::string path = tmp_path("roundtrip.libsvm");
  regbayes::save_libsvm(ds, path);
  const Dataset back = regbayes::load_libsvm(path);
  REQUIRE(back.n_rows() == 3);
  CHECK(same_rows(back.rows, ds.rows));  // exact, not approximate
  CHECK(back.labels == ds.labels);
  CHECK(back.label_values == ds.label_values);
}

TEST_CASE("multilabel csv parses features then label columns") {
  const std::string path = write_file(
      "tasks.csv",
      "a,b,label:x,label:y\n0.1,0.2,1,0\n0,3,,1\n-2,0,0,\n");
  const TaskSet ts = regbayes::load_multilabel_csv(path);
  REQUIRE(ts.n_rows() == 3);
  REQUIRE(ts.n_tasks() == 2);
  CHECK(ts.n_features == 2);
  CHECK(ts.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(ts.task_names == std::vector<std::string>{"x", "y"});
  CHECK(ts.rows[0] == regbayes::SparseRow{{0, 0.1}, {1, 0.2}});
  CHECK(ts.rows[1] == regbayes::SparseRow{{1, 3.0}});
  CHECK(ts.y(0, 0) == 1.0);
  CHECK(ts.y(0, 1) == -1.0);
  CHECK(ts.y(1, 0) == 0.0);  // missing cell
  CHECK(ts.y(1, 1) == 1.0);
  CHECK(ts.y(2, 1) == 0.0);
  // Missing cells are excluded from the per-task training pools.
  CHECK(ts.train_idx[0] == std::vector<int>{0, 2});
  CHECK(ts.train_idx[1] == std::vector<int>{0, 1});
}

TEST_CASE("multilabel csv rejects ragged and malformed rows") {
  const auto message = [](const std::string& name, const std::string& text) {
    try {
      regbayes::load_multilabel_csv(write_file(name, text));
    } catch (const std::runtime_error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK_THAT(message("ragged.csv", "a,label:x\n1,1\n2\n"),
             Catch::Matchers::ContainsSubstring(":3:") &&
                 Catch::Matchers::ContainsSubstring("expected 2"));
  CHECK_THAT(message("nonnum.csv", "a,label:x\nfoo,1\n"),
             Catch::Matchers::ContainsSubstring("bad number 'foo'"));
  CHECK_THAT(message("badlabel.csv", "a,label:x\n1,7\n"),
             Catch::Matchers::ContainsSubstring("label cell"));
  CHECK_THAT(message("nolabel.csv", "a,b\n1,2\n"),
             Catch::Matchers::ContainsSubstring("no label:"));
  CHECK_THAT(message("order.csv", "label:x,a\n1,2\n"),
             Catch::Matchers::ContainsSubstring("after label columns"));
}

TEST_CASE("multilabel csv write then read reproduces the task set") {
  TaskSet ts;
  ts.n_features = 3;
  ts.feature_names = {"u", "v", "w"};
  ts.task_names = {"p", "q"};
  ts.rows = {{{0, 1.5}, {2, -0.25}}, {{1, 1.0 / 7.0}}};
  ts.y = Matrix(2, 2);
  ts.y(0, 0) = 1.0;
  ts.y(0, 1) = -1.0;
  ts.y(1, 0) = 0.0;
  ts.y(1, 1) = 1.0;
  const std::string path = tmp_path("tasks_rt.csv");
  regbayes::save_multilabel_csv(ts, path);
  const TaskSet back = regbayes::load_multilabel_csv(path);
  REQUIRE(back.n_rows() == 2);
  CHECK(same_rows(back.rows, ts.rows));
  CHECK(back.task_names == ts.task_names);
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 2; ++t) CHECK(back.y(i, t) == ts.y(i, t));
}

TEST_CASE("seeded splits are deterministic, disjoint, and sized") {
  const auto [tr, te] = regbayes::make_split(10, 0.7, 42);
  CHECK(tr.size() == 7);
  CHECK(te.size() == 3);
  const auto [tr2, te2] = regbayes::make_split(10, 0.7, 42);
  CHECK(tr == tr2);
  CHECK(te == te2);
  const auto [tr3, te3] = regbayes::make_split(10, 0.7, 43);
  CHECK(tr != tr3);  // different seed reshuffles
  std::vector<int> all(tr.begin(), tr.end());
  all.insert(all.end(), te.begin(), te.end());
  std::sort(all.begin(), all.end());
  std::vector<int> want(10);
  for (int i = 0; i < 10; ++i) want[i] = i;
  CHECK(all == want);
  CHECK(regbayes::make_split(5, 0.5, 0).first.size() + 2 == 5);  // round(2.5)=3
  CHECK_THROWS_AS(regbayes::make_split(0, 0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(regbayes::make_split(5, 1.5, 0), std::invalid_argument);
}

TEST_CASE("split files round-trip and reject junk") {
  const std::string path = tmp_path("split.json");
  regbayes::save_split({0, 2, 4}, {1, 3}, path);
  const auto [tr, te] = regbayes::load_split(path);
  CHECK(tr == std::vector<int>{0, 2, 4});
  CHECK(te == std::vector<int>{1, 3});
  CHECK_THROWS_AS(
      regbayes::load_split(write_file("split_bad.json", "{\"train\":[0]}")),
      std::runtime_error);
  CHECK_THROWS_AS(regbayes::load_split(write_file("split_bad2.json", "not json")),
                  std::runtime_error);
}

TEST_CASE("applying a split validates indices and train labels") {
  Dataset ds;
  ds.n_features = 1;
  ds.rows = {{{0, 1.0}}, {{0, 2.0}}, {{0, 3.0}}};
  ds.labels = {1, 0, 2};
  ds.n_labels = 2;
  ds.label_values = {1.0, 2.0};
  regbayes::apply_split(ds, {2, 0}, {1});
  CHECK(ds.train_idx == std::vector<int>{0, 2});  // stored sorted
  CHECK(ds.test_idx == std::vector<int>{1});
  CHECK_THROWS_AS(regbayes::apply_split(ds, {0, 3}, {}),
                  std::invalid_argument);  // out of range
  CHECK_THROWS_AS(regbayes::apply_split(ds, {0, 0}, {}),
                  std::invalid_argument);  // duplicate
  CHECK_THROWS_AS(regbayes::apply_split(ds, {0}, {0}),
                  std::invalid_argument);  // overlap
  CHECK_THROWS_AS(regbayes::apply_split(ds, {1}, {}),
                  std::invalid_argument);  // unlabeled train row
}

TEST_CASE("task splits keep only observed cells per task") {
  TaskSet ts;
  ts.n_features = 1;
  ts.task_names = {"p", "q"};
  ts.rows = {{}, {}, {}, {}};
  ts.y = Matrix(4, 2);
  ts.y(0, 0) = 1.0;
  ts.y(1, 0) = -1.0;
  ts.y(3, 0) = 1.0;
  ts.y(0, 1) = -1.0;
  ts.y(2, 1) = 1.0;
  regbayes::apply_split(ts, {0, 1, 2}, {3});
  CHECK(ts.train_idx[0] == std::vector<int>{0, 1});
  CHECK(ts.train_idx[1] == std::vector<int>{0, 2});
  CHECK(ts.test_idx[0] == std::vector<int>{3});
  CHECK(ts.test_idx[1].empty());  // row 3 unobserved for task q
}

TEST_CASE("standardization uses train statistics only") {
  Dataset ds;
  ds.n_features = 3;
  // Feature 0: train values 1,3 (mean 2, population sd 1).  Feature 1:
  // constant.  Feature 2: train values 0,4 (mean 2, sd 2).
  ds.rows = {{{0, 1.0}, {1, 5.0}},
             {{0, 3.0}, {1, 5.0}, {2, 4.0}},
             {{0, 10.0}, {1, 5.0}, {2, 2.0}}};
  ds.labels = {1, 1, 1};
  ds.n_labels = 1;
  ds.label_values = {1.0};
  ds.train_idx = {0, 1};
  ds.test_idx = {2};
  Dataset other = ds;
  other.rows[2] = {{0, -50.0}, {2, 9.0}};  // different test row, same train
  regbayes::standardize(ds);
  regbayes::standardize(other);
  const auto r0 = regbayes::row_dense(ds.rows[0], 3);
  const auto r1 = regbayes::row_dense(ds.rows[1], 3);
  const auto r2 = regbayes::row_dense(ds.rows[2], 3);
  CHECK_THAT(r0[0], Catch::Matchers::WithinAbs(-1.0, 1e-12));
  CHECK_THAT(r1[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK(r0[1] == 5.0);  // constant feature untouched
  CHECK(r1[1] == 5.0);
  CHECK_THAT(r0[2], Catch::Matchers::WithinAbs(-1.0, 1e-12));
  CHECK_THAT(r1[2], Catch::Matchers::WithinAbs(1.0, 1e-12));
  // Test rows are transformed with the train statistics.
  CHECK_THAT(r2[0], Catch::Matchers::WithinAbs(8.0, 1e-12));
  CHECK_THAT(r2[2], Catch::Matchers::WithinAbs(0.0, 1e-12));
  // Changing test rows never changes the transform of the train block.
  for (int i = 0; i < 2; ++i) {
    const auto a = regbayes::row_dense(ds.rows[i], 3);
    const auto b = regbayes::row_dense(other.rows[i], 3);
    for (int j = 0; j < 3; ++j) CHECK(a[j] == b[j]);
  }
}

TEST_CASE("standardizing twice is the identity within 1e-12") {
  Dataset ds;
  ds.n_features = 2;
  ds.rows = {{{0, -1.0}, {1, 2.0}}, {{0, 1.0}, {1, -2.0}}};
  ds.labels = {1, 1};
  ds.n_labels = 1;
  ds.label_values = {1.0};
  regbayes::standardize(ds);  // no split: stats over all rows
  Dataset again = ds;
  regbayes::standardize(again);
  for (int i = 0; i < 2; ++i) {
    const auto a = regbayes::row_dense(ds.rows[i], 2);
    const auto b = regbayes::row_dense(again.rows[i], 2);
    for (int j = 0; j < 2; ++j)
      CHECK_THAT(b[j], Catch::Matchers::WithinAbs(a[j], 1e-12));
  }
}

TEST_CASE("noise-free rank-one synthesis stays rank one") {
  SynthParams p;
  p.n_rows = 12;
  p.n_features = 6;
  p.k_true = 1;
  p.noise_sd = 0.0;
  p.n_labels = 2;
  p.seed = 7;
  const Dataset ds = regbayes::synth_multiclass(p);
  // Every 2x2 minor of X must vanish.
  const Matrix x = regbayes::dense_matrix(ds.rows, ds.n_features);
  for (int i = 0; i < x.rows; ++i)
    for (int r = i + 1; r < x.rows; ++r)
      for (int j = 0; j < x.cols; ++j)
        for (int c = j + 1; c < x.cols; ++c)
          CHECK_THAT(x(i, j) * x(r, c) - x(i, c) * x(r, j),
                     Catch::Matchers::WithinAbs(0.0, 1e-10));
}

TEST_CASE("synthesis is reproducible for a fixed seed") {
  SynthParams p;
  p.n_rows = 25;
  p.n_features = 8;
  p.k_true = 4;
  p.alpha = 2.0;
  p.n_labels = 3;
  p.seed = 99;
  SynthTruth t1, t2;
  const Dataset a = regbayes::synth_multiclass(p, &t1);
  const Dataset b = regbayes::synth_multiclass(p, &t2);
  CHECK(same_rows(a.rows, b.rows));
  CHECK(a.labels == b.labels);
  CHECK(t1.eta.data == t2.eta.data);
  p.seed = 100;
  const Dataset c = regbayes::synth_multiclass(p);
  CHECK_FALSE(same_rows(a.rows, c.rows));

  SynthParams q;
  q.n_rows = 20;
  q.n_features = 10;
  q.k_true = 3;
  q.n_tasks = 3;
  q.seed = 5;
  const TaskSet ta = regbayes::synth_multitask(q);
  const TaskSet tb = regbayes::synth_multitask(q);
  CHECK(same_rows(ta.rows, tb.rows));
  CHECK(ta.y.data == tb.y.data);
}

TEST_CASE("multi-way synthetic labels are separable in the true latent space") {
  SynthParams p;
  p.n_rows = 60;
  p.n_features = 12;
  p.k_true = 5;
  p.alpha = 2.0;
  p.n_labels = 3;
  p.noise_sd = 0.1;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    p.seed = seed;
    SynthTruth truth;
    const Dataset ds = regbayes::synth_multiclass(p, &truth);
    std::vector<std::vector<double>> zrows;
    for (int i = 0; i < truth.z.rows; ++i) {
      std::vector<double> row(truth.z.cols);
      for (int k = 0; k < truth.z.cols; ++k) row[k] = truth.z(i, k);
      zrows.push_back(std::move(row));
    }
    CHECK(oracle::multiclass_perceptron_separates(zrows, ds.labels,
                                                  p.n_labels));
  }
}

TEST_CASE("multi-task synthetic labels are separable per task") {
  SynthParams p;
  p.n_rows = 40;
  p.n_features = 15;
  p.k_true = 4;
  p.alpha = 2.0;
  p.n_tasks = 4;
  p.noise_sd = 0.1;
  p.seed = 11;
  SynthTruth truth;
  const TaskSet ts = regbayes::synth_multitask(p, &truth);
  // Labels were drawn on v_n = Z' x_n; check each task separates there.
  std::vector<std::vector<double>> v;
  for (int i = 0; i < p.n_rows; ++i) {
    const auto x = regbayes::row_dense(ts.rows[i], p.n_features);
    std::vector<double> vi(p.k_true, 0.0);
    for (int k = 0; k < p.k_true; ++k)
      for (int j = 0; j < p.n_features; ++j) vi[k] += truth.z(j, k) * x[j];
    v.push_back(std::move(vi));
  }
  for (int t = 0; t < p.n_tasks; ++t) {
    std::vector<int> y(p.n_rows);
    for (int i = 0; i < p.n_rows; ++i)
      y[i] = ts.y(i, t) > 0.0 ? 1 : -1;
    CHECK(oracle::binary_perceptron_separates(v, y));
  }
}

TEST_CASE("synthesis validates its parameters") {
  SynthParams p;
  p.n_rows = 0;
  CHECK_THROWS_AS(regbayes::synth_multiclass(p), std::invalid_argument);
  p = SynthParams{};
  p.alpha = 0.0;
  CHECK_THROWS_AS(regbayes::synth_multiclass(p), std::invalid_argument);
  p = SynthParams{};
  p.n_labels = 1;
  CHECK_THROWS_AS(regbayes::synth_multiclass(p), std::invalid_argument);
  p = SynthParams{};
  p.n_tasks = 0;
  CHECK_THROWS_AS(regbayes::synth_multitask(p), std::invalid_argument);
  p = SynthParams{};
  p.noise_sd = -1.0;
  CHECK_THROWS_AS(regbayes::synth_multitask(p), std::invalid_argument);
}

TEST_CASE("ground-truth sidecars round-trip through json") {
  SynthParams p;
  p.n_rows = 10;
  p.n_features = 4;
  p.k_true = 2;
  p.seed = 3;
  SynthTruth truth;
  regbayes::synth_multiclass(p, &truth);
  const std::string path = tmp_path("truth.json");
  regbayes::save_truth(truth, path);
  const SynthTruth back = regbayes::load_truth(path);
  CHECK(back.z.data == truth.z.data);
  CHECK(back.w.data == truth.w.data);
  CHECK(back.eta.data == truth.eta.data);
  CHECK(back.z.rows == truth.z.rows);
  CHECK(back.w.cols == truth.w.cols);
}
