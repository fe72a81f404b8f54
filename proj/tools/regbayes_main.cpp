// Command-line front end: fit, predict, eval, synth, and cross-validated
// fitting for the multi-way and multi-task latent-feature max-margin models.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regbayes/data.hpp"
#include "regbayes/dense.hpp"
#include "regbayes/ilsvm.hpp"
#include "regbayes/metrics.hpp"
#include "regbayes/model_io.hpp"
#include "regbayes/mt_ilsvm.hpp"

namespace {

using namespace regbayes;

struct Options {
  std::string model = "ilsvm";
  std::string mode = "full";
  std::string data_path;
  std::string split;  // JSON split file, or a train fraction in (0,1)
  std::string config_path;
  std::string model_file;
  std::string out;
  double alpha = 1.0;
  double c = 1.0;
  int truncation = 50;
  std::uint64_t seed = 0;
  bool estimate_hypers = false;
  double inner_tol = 1e-3, outer_tol = 1e-4, svm_tol = 1e-6;
  int inner_iters = 10, outer_iters = 20, svm_max_passes = 1000;
  // synth
  int synth_rows = 100, synth_features = 10, k_true = 3;
  int n_labels = 2, n_tasks = 2;
  double noise_sd = 0.1;
  // cv
  int folds = 5;
  std::string grid_alpha = "0.5,1,2";
  std::string grid_c = "0.5,1,2";
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::string fmt(double v) {
  char buf[64];
  return regbayes::detail::fmt_g17(buf, v);
}

// A --split value strictly between 0 and 1 is a train fraction; anything
// else is a path to a JSON split file.
bool parse_fraction(const std::string& s, double* frac) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size() && v > 0.0 && v < 1.0) {
      *frac = v;
      return true;
    }
  } catch (const std::exception&) {
  }
  return false;
}

std::vector<double> parse_grid(const std::string& csv, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(cell, &pos);
      if (pos != cell.size() || !std::isfinite(v)) throw std::exception();
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(flag) + ": bad grid value '" +
                                  cell + "'");
    }
  }
  require(!out.empty(), std::string(flag) + ": empty grid");
  return out;
}

// Copies one config-file field into its option slot unless the matching flag
// was given on the command line (flags win) or the command lacks the flag.
template <class T>
void take(const CLI::App& cmd, const nlohmann::json& j, const char* key,
          const char* flag, T& slot) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  const CLI::Option* opt = cmd.get_option_no_throw(flag);
  if (opt == nullptr || opt->count() > 0) return;
  try {
    slot = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("config file: field '") + key +
                                "' has the wrong type");
  }
}

void apply_config_file(const CLI::App& cmd, Options& o) {
  if (o.config_path.empty()) return;
  const nlohmann::json j = regbayes::detail::read_json(o.config_path);
  require(j.is_object(), o.config_path + ": config must be a JSON object");
  static const std::set<std::string> known = {
      "model",      "mode",        "data",          "split",
      "alpha",      "c",           "truncation",    "seed",
      "estimate_hypers",           "out",           "inner_tol",
      "inner_iters",               "outer_tol",     "outer_iters",
      "svm_tol",    "svm_max_passes",               "rows",
      "features",   "k_true",      "noise_sd",      "labels",
      "tasks",      "cv",          "grid_alpha",    "grid_c",
      "model_file"};
  for (const auto& [key, value] : j.items())
    if (known.find(key) == known.end())
      throw std::invalid_argument(o.config_path + ": unknown field '" + key +
                                  "'");
  take(cmd, j, "model", "--model", o.model);
  take(cmd, j, "mode", "--mode", o.mode);
  take(cmd, j, "data", "--data", o.data_path);
  take(cmd, j, "split", "--split", o.split);
  take(cmd, j, "alpha", "--alpha", o.alpha);
  take(cmd, j, "c", "--c", o.c);
  take(cmd, j, "truncation", "--truncation", o.truncation);
  take(cmd, j, "seed", "--seed", o.seed);
  take(cmd, j, "estimate_hypers", "--estimate-hypers", o.estimate_hypers);
  take(cmd, j, "out", "--out", o.out);
  take(cmd, j, "inner_tol", "--inner-tol", o.inner_tol);
  take(cmd, j, "inner_iters", "--inner-iters", o.inner_iters);
  take(cmd, j, "outer_tol", "--outer-tol", o.outer_tol);
  take(cmd, j, "outer_iters", "--outer-iters", o.outer_iters);
  take(cmd, j, "svm_tol", "--svm-tol", o.svm_tol);
  take(cmd, j, "svm_max_passes", "--svm-max-passes", o.svm_max_passes);
  take(cmd, j, "rows", "--rows", o.synth_rows);
  take(cmd, j, "features", "--features", o.synth_features);
  take(cmd, j, "k_true", "--k-true", o.k_true);
  take(cmd, j, "noise_sd", "--noise-sd", o.noise_sd);
  take(cmd, j, "labels", "--labels", o.n_labels);
  take(cmd, j, "tasks", "--tasks", o.n_tasks);
  take(cmd, j, "cv", "--cv", o.folds);
  take(cmd, j, "grid_alpha", "--grid-alpha", o.grid_alpha);
  take(cmd, j, "grid_c", "--grid-c", o.grid_c);
  take(cmd, j, "model_file", "--model-file", o.model_file);
}

void check_model_mode(const Options& o) {
  require(o.model == "ilsvm" || o.model == "mt-ilsvm",
          "model must be 'ilsvm' or 'mt-ilsvm', got '" + o.model + "'");
  require(o.mode == "full" || o.mode == "decoupled",
          "mode must be 'full' or 'decoupled', got '" + o.mode + "'");
}

IlsvmConfig ilsvm_config(const Options& o) {
  IlsvmConfig cfg;
  cfg.alpha = o.alpha;
  cfg.c = o.c;
  cfg.truncation = o.truncation;
  cfg.inner_tol = o.inner_tol;
  cfg.inner_iters = o.inner_iters;
  cfg.outer_tol = o.outer_tol;
  cfg.outer_iters = o.outer_iters;
  cfg.estimate_hypers = o.estimate_hypers;
  cfg.seed = o.seed;
  cfg.svm_tol = o.svm_tol;
  cfg.svm_max_passes = o.svm_max_passes;
  cfg.validate();
  return cfg;
}

MtConfig mt_config(const Options& o) {
  MtConfig cfg;
  cfg.alpha = o.alpha;
  cfg.c = o.c;
  cfg.truncation = o.truncation;
  cfg.inner_tol = o.inner_tol;
  cfg.inner_iters = o.inner_iters;
  cfg.outer_tol = o.outer_tol;
  cfg.outer_iters = o.outer_iters;
  cfg.estimate_hypers = o.estimate_hypers;
  cfg.seed = o.seed;
  cfg.svm_tol = o.svm_tol;
  cfg.svm_max_passes = o.svm_max_passes;
  cfg.validate();
  return cfg;
}

std::pair<std::vector<int>, std::vector<int>> resolve_split(
    const std::string& split, int n_rows, std::uint64_t seed) {
  double frac = 0.0;
  if (parse_fraction(split, &frac)) return make_split(n_rows, frac, seed);
  return load_split(split);
}

// Loads the multi-way dataset and installs the requested split; with no
// --split every row trains (the loader leaves both index sets empty).
Dataset load_multiclass_data(const Options& o) {
  Dataset ds = load_libsvm(o.data_path);
  require(ds.n_rows() > 0, o.data_path + ": no data rows");
  if (!o.split.empty()) {
    auto [tr, te] = resolve_split(o.split, ds.n_rows(), o.seed);
    apply_split(ds, std::move(tr), std::move(te));
  } else if (ds.train_idx.empty()) {
    ds.train_idx.resize(static_cast<std::size_t>(ds.n_rows()));
    std::iota(ds.train_idx.begin(), ds.train_idx.end(), 0);
  }
  return ds;
}

// Loads the multi-task dataset; with no --split every observed cell trains
// (the loader's default).
TaskSet load_multitask_data(const Options& o) {
  TaskSet ts = load_multilabel_csv(o.data_path);
  require(ts.n_rows() > 0, o.data_path + ": no data rows");
  if (!o.split.empty()) {
    const auto [tr, te] = resolve_split(o.split, ts.n_rows(), o.seed);
    apply_split(ts, tr, te);
  }
  return ts;
}

void report_fit(const std::vector<double>& trace, int cap, double kkt,
                const std::string& out) {
  const int passes = static_cast<int>(trace.size()) - 1;
  std::cout << "fit: " << passes << " outer passes, objective "
            << fmt(trace.back()) << ", dual kkt residual " << kkt << '\n';
  if (passes >= cap)
    std::cout << "fit: stopped at the outer iteration cap (" << cap << ")\n";
  std::cout << "wrote " << out << ".model.json\n";
  std::cout << "wrote " << out << ".trace.csv\n";
}

int run_fit(const CLI::App& cmd, Options o) {
  apply_config_file(cmd, o);
  check_model_mode(o);
  require(!o.data_path.empty(), "fit: --data is required");
  require(!o.out.empty(), "fit: --out is required");
  if (o.model == "ilsvm") {
    const IlsvmConfig cfg = ilsvm_config(o);
    const Dataset ds = load_multiclass_data(o);
    IlsvmState st =
        o.mode == "full" ? fit_ilsvm(ds, cfg) : decoupled_ilsvm(ds, cfg);
    IlsvmModel m{cfg,           std::move(st), ds.n_features,
                 ds.label_values, ds.train_idx, ds.test_idx};
    save_model(m, o.out + ".model.json");
    save_trace_csv(m.state.trace, o.out + ".trace.csv");
    report_fit(m.state.trace, cfg.outer_iters, m.state.kkt_violation, o.out);
  } else {
    const MtConfig cfg = mt_config(o);
    const TaskSet ts = load_multitask_data(o);
    MtState st =
        o.mode == "full" ? fit_mt(ts, cfg) : decoupled_baseline(ts, cfg);
    MtModel m{cfg,           std::move(st), ts.n_features,
              ts.task_names, ts.train_idx,  ts.test_idx};
    save_model(m, o.out + ".model.json");
    save_trace_csv(m.state.trace, o.out + ".trace.csv");
    report_fit(m.state.trace, cfg.outer_iters, m.state.kkt_violation, o.out);
  }
  return 0;
}

// The multi-way model is transductive: posterior feature activations exist
// for exactly the rows it was fitted on, so the data file must present the
// same rows and predictions read off the stored activations.
void check_ilsvm_data(const IlsvmModel& m, const Dataset& ds) {
  require(ds.n_features <= m.n_features,
          "data has " + std::to_string(ds.n_features) +
              " features; model was fit with " + std::to_string(m.n_features));
  require(ds.n_rows() == m.state.n_rows(),
          "model holds posteriors for " + std::to_string(m.state.n_rows()) +
              " rows; data has " + std::to_string(ds.n_rows()));
}

int model_label_code(const IlsvmModel& m, double raw) {
  for (std::size_t i = 0; i < m.label_values.size(); ++i)
    if (m.label_values[i] == raw) return static_cast<int>(i) + 1;
  throw std::invalid_argument("label value " + fmt(raw) +
                              " does not appear in the model");
}

int run_predict(const CLI::App& cmd, Options o) {
  apply_config_file(cmd, o);
  require(!o.model_file.empty(), "predict: --model-file is required");
  require(!o.data_path.empty(), "predict: --data is required");
  require(!o.out.empty(), "predict: --out is required");
  const std::string kind = model_kind(o.model_file);
  std::ofstream out = regbayes::detail::open_out(o.out);
  if (kind == "ilsvm") {
    const IlsvmModel m = load_ilsvm_model(o.model_file);
    const Dataset ds = load_libsvm(o.data_path);
    check_ilsvm_data(m, ds);
    out << "row,label\n";
    for (int n = 0; n < m.state.n_rows(); ++n) {
      const int code = predict_label(m.state, n);
      out << n << ','
          << fmt(m.label_values[static_cast<std::size_t>(code) - 1]) << '\n';
    }
  } else {
    const MtModel m = load_mt_model(o.model_file);
    const TaskSet ts = load_multilabel_csv(o.data_path);
    require(ts.n_features == m.n_features,
            "data has " + std::to_string(ts.n_features) +
                " features; model was fit with " +
                std::to_string(m.n_features));
    const Matrix pred = predict_tasks(m.state, ts);
    out << "row";
    for (const std::string& name : m.task_names) out << ',' << name;
    out << '\n';
    for (int n = 0; n < pred.rows; ++n) {
      out << n;
      for (int t = 0; t < pred.cols; ++t)
        out << ',' << static_cast<int>(pred(n, t));
      out << '\n';
    }
  }
  out.flush();
  if (!out) throw std::runtime_error(o.out + ": write failed");
  std::cout << "wrote " << o.out << '\n';
  return 0;
}

void print_report(const EvalReport& r) {
  std::cout << "accuracy " << r.accuracy << ", f1 macro " << r.f1_macro
            << ", f1 micro " << r.f1_micro << '\n';
}

int run_eval(const CLI::App& cmd, Options o) {
  apply_config_file(cmd, o);
  require(!o.model_file.empty(), "eval: --model-file is required");
  require(!o.data_path.empty(), "eval: --data is required");
  require(!o.out.empty(), "eval: --out is required");
  const std::string kind = model_kind(o.model_file);
  EvalReport r;
  if (kind == "ilsvm") {
    const IlsvmModel m = load_ilsvm_model(o.model_file);
    Dataset ds = load_libsvm(o.data_path);
    check_ilsvm_data(m, ds);
    std::vector<int> rows;
    if (!o.split.empty()) {
      auto [tr, te] = resolve_split(o.split, ds.n_rows(), o.seed);
      apply_split(ds, std::move(tr), std::move(te));
      rows = ds.test_idx;
    } else if (!m.test_idx.empty()) {
      rows = m.test_idx;
      for (int i : rows)
        require(i >= 0 && i < ds.n_rows(),
                "model test index " + std::to_string(i) +
                    " is out of range for this data");
    } else {
      rows.resize(static_cast<std::size_t>(ds.n_rows()));
      std::iota(rows.begin(), rows.end(), 0);
    }
    require(!rows.empty(), "eval: no evaluation rows");
    std::vector<int> pred, truth;
    for (int i : rows) {
      pred.push_back(predict_label(m.state, i));
      const int code = ds.labels[static_cast<std::size_t>(i)];
      require(code >= 1, "row " + std::to_string(i) + " has no label");
      truth.push_back(model_label_code(
          m, ds.label_values[static_cast<std::size_t>(code) - 1]));
    }
    r.accuracy = accuracy(pred, truth);
    const auto [macro, micro] =
        f1_one_vs_rest(pred, truth, m.state.n_labels(), &r.per_task);
    r.f1_macro = macro;
    r.f1_micro = micro;
    for (std::size_t y = 0; y < r.per_task.size(); ++y)
      r.per_task[y].name =
          y < m.label_values.size() ? "class:" + fmt(m.label_values[y])
                                    : "class:" + std::to_string(y + 1);
  } else {
    const MtModel m = load_mt_model(o.model_file);
    TaskSet ts = load_multilabel_csv(o.data_path);
    require(ts.n_features == m.n_features,
            "data has " + std::to_string(ts.n_features) +
                " features; model was fit with " +
                std::to_string(m.n_features));
    require(ts.n_tasks() == m.state.n_tasks(),
            "data declares " + std::to_string(ts.n_tasks()) +
                " tasks; model has " + std::to_string(m.state.n_tasks()));
    std::vector<std::vector<int>> cells;
    if (!o.split.empty()) {
      const auto [tr, te] = resolve_split(o.split, ts.n_rows(), o.seed);
      apply_split(ts, tr, te);
      cells = ts.test_idx;
    } else {
      bool stored = ts.n_rows() == m.state.n_examples() &&
                    static_cast<int>(m.test_idx.size()) == ts.n_tasks();
      if (stored) {
        bool any = false;
        for (const std::vector<int>& v : m.test_idx) any = any || !v.empty();
        stored = any;
      }
      cells.assign(static_cast<std::size_t>(ts.n_tasks()), {});
      for (int t = 0; t < ts.n_tasks(); ++t) {
        if (stored) {
          for (int i : m.test_idx[static_cast<std::size_t>(t)])
            if (i >= 0 && i < ts.n_rows() && ts.y(i, t) != 0.0)
              cells[static_cast<std::size_t>(t)].push_back(i);
        } else {
          for (int i = 0; i < ts.n_rows(); ++i)
            if (ts.y(i, t) != 0.0)
              cells[static_cast<std::size_t>(t)].push_back(i);
        }
      }
    }
    Matrix pred(ts.n_rows(), ts.n_tasks()), truth(ts.n_rows(), ts.n_tasks());
    long hits = 0, total = 0;
    for (int t = 0; t < ts.n_tasks(); ++t)
      for (int i : cells[static_cast<std::size_t>(t)]) {
        require(ts.y(i, t) != 0.0, "evaluation cell (" + std::to_string(i) +
                                       "," + std::to_string(t) +
                                       ") has no label");
        const int p =
            predict_task(m.state, t, ts.rows[static_cast<std::size_t>(i)]);
        pred(i, t) = p;
        truth(i, t) = ts.y(i, t);
        ++total;
        if (static_cast<double>(p) == ts.y(i, t)) ++hits;
      }
    require(total > 0, "eval: no labeled evaluation cells");
    r.accuracy = static_cast<double>(hits) / static_cast<double>(total);
    const auto [macro, micro] = f1_scores(pred, truth, &r.per_task);
    r.f1_macro = macro;
    r.f1_micro = micro;
    for (std::size_t t = 0; t < r.per_task.size(); ++t)
      r.per_task[t].name = m.task_names[t];
  }
  save_eval_report(r, o.out);
  print_report(r);
  std::cout << "wrote " << o.out << '\n';
  return 0;
}

int run_synth(const CLI::App& cmd, Options o) {
  apply_config_file(cmd, o);
  require(o.model == "ilsvm" || o.model == "mt-ilsvm",
          "model must be 'ilsvm' or 'mt-ilsvm', got '" + o.model + "'");
  require(!o.out.empty(), "synth: --out is required");
  SynthParams p;
  p.n_rows = o.synth_rows;
  p.n_features = o.synth_features;
  p.k_true = o.k_true;
  p.alpha = o.alpha;
  p.noise_sd = o.noise_sd;
  p.n_labels = o.n_labels;
  p.n_tasks = o.n_tasks;
  p.seed = o.seed;
  auto [tr, te] = o.split.empty()
                      ? make_split(p.n_rows, 0.7, p.seed)
                      : resolve_split(o.split, p.n_rows, p.seed);
  SynthTruth truth;
  std::string data_file;
  if (o.model == "ilsvm") {
    Dataset ds = synth_multiclass(p, &truth);
    apply_split(ds, std::move(tr), std::move(te));
    data_file = o.out + ".libsvm";
    save_libsvm(ds, data_file);
    save_split(ds.train_idx, ds.test_idx, o.out + ".split.json");
  } else {
    TaskSet ts = synth_multitask(p, &truth);
    apply_split(ts, tr, te);
    data_file = o.out + ".csv";
    save_multilabel_csv(ts, data_file);
    save_split(tr, te, o.out + ".split.json");
  }
  save_truth(truth, o.out + ".truth.json");
  std::cout << "wrote " << data_file << " (" << p.n_rows << " rows, "
            << p.n_features << " features)\n";
  std::cout << "wrote " << o.out << ".split.json\n";
  std::cout << "wrote " << o.out << ".truth.json\n";
  return 0;
}

// Shuffled round-robin fold labels for the training pool.
std::vector<int> assign_folds(int n, int k, std::uint64_t seed) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(rng.below(i + 1))]);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    fold[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i % k;
  return fold;
}

// One fold's view of the multi-way training pool: pool rows only, with the
// held-out fold as the test side.
Dataset ilsvm_fold_data(const Dataset& ds, const std::vector<int>& pool,
                        const std::vector<int>& fold_of, int fold) {
  Dataset sub;
  sub.n_features = ds.n_features;
  sub.n_labels = ds.n_labels;
  sub.label_values = ds.label_values;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const std::size_t src = static_cast<std::size_t>(pool[i]);
    sub.rows.push_back(ds.rows[src]);
    sub.labels.push_back(ds.labels[src]);
    if (fold_of[i] == fold)
      sub.test_idx.push_back(static_cast<int>(i));
    else
      sub.train_idx.push_back(static_cast<int>(i));
  }
  return sub;
}

double ilsvm_fold_accuracy(const Dataset& ds, const std::vector<int>& pool,
                           const std::vector<int>& fold_of, int fold,
                           const IlsvmConfig& cfg, const std::string& mode) {
  const Dataset sub = ilsvm_fold_data(ds, pool, fold_of, fold);
  const IlsvmState st =
      mode == "full" ? fit_ilsvm(sub, cfg) : decoupled_ilsvm(sub, cfg);
  std::vector<int> pred, truth;
  for (int i : sub.test_idx) {
    pred.push_back(predict_label(st, i));
    truth.push_back(sub.labels[static_cast<std::size_t>(i)]);
  }
  return accuracy(pred, truth);
}

// One fold's view of the multi-task training cells.
TaskSet mt_fold_data(const TaskSet& ts, const std::vector<int>& pool,
                     const std::vector<int>& fold_of, int fold,
                     const std::vector<std::vector<char>>& is_train_cell) {
  TaskSet sub;
  sub.n_features = ts.n_features;
  sub.task_names = ts.task_names;
  sub.feature_names = ts.feature_names;
  sub.y = Matrix(static_cast<int>(pool.size()), ts.n_tasks());
  sub.train_idx.assign(static_cast<std::size_t>(ts.n_tasks()), {});
  sub.test_idx.assign(static_cast<std::size_t>(ts.n_tasks()), {});
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const int src = pool[i];
    sub.rows.push_back(ts.rows[static_cast<std::size_t>(src)]);
    for (int t = 0; t < ts.n_tasks(); ++t) {
      if (!is_train_cell[static_cast<std::size_t>(t)]
                        [static_cast<std::size_t>(src)])
        continue;
      sub.y(static_cast<int>(i), t) = ts.y(src, t);
      if (fold_of[i] == fold)
        sub.test_idx[static_cast<std::size_t>(t)].push_back(
            static_cast<int>(i));
      else
        sub.train_idx[static_cast<std::size_t>(t)].push_back(
            static_cast<int>(i));
    }
  }
  return sub;
}

double mt_fold_accuracy(const TaskSet& ts, const std::vector<int>& pool,
                        const std::vector<int>& fold_of, int fold,
                        const std::vector<std::vector<char>>& is_train_cell,
                        const MtConfig& cfg, const std::string& mode) {
  const TaskSet sub = mt_fold_data(ts, pool, fold_of, fold, is_train_cell);
  const MtState st =
      mode == "full" ? fit_mt(sub, cfg) : decoupled_baseline(sub, cfg);
  long hits = 0, total = 0;
  for (int t = 0; t < sub.n_tasks(); ++t)
    for (int i : sub.test_idx[static_cast<std::size_t>(t)]) {
      const int p =
          predict_task(st, t, sub.rows[static_cast<std::size_t>(i)]);
      ++total;
      if (static_cast<double>(p) == sub.y(i, t)) ++hits;
    }
  require(total > 0, "cv: a fold has no evaluation cells");
  return static_cast<double>(hits) / static_cast<double>(total);
}

int run_cv(const CLI::App& cmd, Options o) {
  apply_config_file(cmd, o);
  check_model_mode(o);
  require(!o.data_path.empty(), "cv: --data is required");
  require(!o.out.empty(), "cv: --out is required");
  require(o.folds >= 2, "cv: need at least 2 folds");
  const std::vector<double> alphas = parse_grid(o.grid_alpha, "--grid-alpha");
  const std::vector<double> cs = parse_grid(o.grid_c, "--grid-c");
  for (double a : alphas)
    require(a > 0.0, "--grid-alpha entries must be > 0");
  for (double c : cs) require(c >= 0.0, "--grid-c entries must be >= 0");

  nlohmann::json grid = nlohmann::json::array();
  double best_acc = -1.0;
  double best_alpha = alphas.front(), best_c = cs.front();

  Options probe = o;  // per-point options for config construction
  if (o.model == "ilsvm") {
    const Dataset ds = load_multiclass_data(o);
    const std::vector<int>& pool = ds.train_idx;
    require(static_cast<int>(pool.size()) >= o.folds,
            "cv: fewer training rows than folds");
    const std::vector<int> fold_of =
        assign_folds(static_cast<int>(pool.size()), o.folds, o.seed);
    for (double a : alphas)
      for (double c : cs) {
        probe.alpha = a;
        probe.c = c;
        const IlsvmConfig cfg = ilsvm_config(probe);
        double mean = 0.0;
        nlohmann::json accs = nlohmann::json::array();
        for (int f = 0; f < o.folds; ++f) {
          const double acc =
              ilsvm_fold_accuracy(ds, pool, fold_of, f, cfg, o.mode);
          accs.push_back(acc);
          mean += acc;
        }
        mean /= o.folds;
        std::cout << "cv: alpha " << a << ", c " << c << " -> mean accuracy "
                  << mean << '\n';
        grid.push_back({{"alpha", a},
                        {"c", c},
                        {"fold_accuracy", accs},
                        {"mean_accuracy", mean}});
        if (mean > best_acc) {
          best_acc = mean;
          best_alpha = a;
          best_c = c;
        }
      }
  } else {
    const TaskSet ts = load_multitask_data(o);
    std::vector<std::vector<char>> is_train_cell(
        static_cast<std::size_t>(ts.n_tasks()),
        std::vector<char>(static_cast<std::size_t>(ts.n_rows()), 0));
    std::set<int> pool_set;
    for (int t = 0; t < ts.n_tasks(); ++t)
      for (int i : ts.train_idx[static_cast<std::size_t>(t)]) {
        is_train_cell[static_cast<std::size_t>(t)][static_cast<std::size_t>(
            i)] = 1;
        pool_set.insert(i);
      }
    const std::vector<int> pool(pool_set.begin(), pool_set.end());
    require(static_cast<int>(pool.size()) >= o.folds,
            "cv: fewer training rows than folds");
    const std::vector<int> fold_of =
        assign_folds(static_cast<int>(pool.size()), o.folds, o.seed);
    for (double a : alphas)
      for (double c : cs) {
        probe.alpha = a;
        probe.c = c;
        const MtConfig cfg = mt_config(probe);
        double mean = 0.0;
        nlohmann::json accs = nlohmann::json::array();
        for (int f = 0; f < o.folds; ++f) {
          const double acc = mt_fold_accuracy(ts, pool, fold_of, f,
                                              is_train_cell, cfg, o.mode);
          accs.push_back(acc);
          mean += acc;
        }
        mean /= o.folds;
        std::cout << "cv: alpha " << a << ", c " << c << " -> mean accuracy "
                  << mean << '\n';
        grid.push_back({{"alpha", a},
                        {"c", c},
                        {"fold_accuracy", accs},
                        {"mean_accuracy", mean}});
        if (mean > best_acc) {
          best_acc = mean;
          best_alpha = a;
          best_c = c;
        }
      }
  }

  std::cout << "cv: best alpha " << best_alpha << ", c " << best_c
            << " (mean accuracy " << best_acc << ")\n";
  nlohmann::json report;
  report["grid"] = std::move(grid);
  report["best"] = {{"alpha", best_alpha},
                    {"c", best_c},
                    {"mean_accuracy", best_acc}};
  regbayes::detail::write_json(report, o.out + ".cv.json");
  std::cout << "wrote " << o.out << ".cv.json\n";

  o.alpha = best_alpha;
  o.c = best_c;
  o.config_path.clear();  // already merged; must not clobber the chosen pair
  return run_fit(cmd, o);
}

void add_hyper_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--alpha", o.alpha,
                  "feature-growth rate of the latent-feature prior");
  cmd->add_option("--c", o.c, "margin-constraint weight; 0 turns the "
                              "classifier off");
  cmd->add_option("--truncation", o.truncation, "latent feature cap");
  cmd->add_option("--seed", o.seed, "seed for all randomness");
  cmd->add_flag("--estimate-hypers", o.estimate_hypers,
                "re-estimate prior/noise variances each outer pass");
  cmd->add_option("--inner-tol", o.inner_tol,
                  "relative tolerance of the inner coordinate sweeps");
  cmd->add_option("--inner-iters", o.inner_iters,
                  "cap on inner sweeps per outer pass");
  cmd->add_option("--outer-tol", o.outer_tol,
                  "relative tolerance on the objective across outer passes");
  cmd->add_option("--outer-iters", o.outer_iters, "cap on outer passes");
  cmd->add_option("--svm-tol", o.svm_tol,
                  "kkt tolerance of the embedded dual solvers");
  cmd->add_option("--svm-max-passes", o.svm_max_passes,
                  "pass cap of the embedded dual solvers");
}

void add_data_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--model", o.model, "model family: ilsvm | mt-ilsvm");
  cmd->add_option("--data", o.data_path,
                  "dataset path (libsvm text for ilsvm, labeled CSV for "
                  "mt-ilsvm)");
  cmd->add_option("--split", o.split,
                  "train/test split: JSON file or a train fraction in (0,1)");
  cmd->add_option("--config", o.config_path,
                  "JSON file of option defaults; explicit flags win");
  cmd->add_option("--out", o.out, "output path prefix");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Nonparametric latent-feature discovery fused with large-margin "
      "classification: single-label multi-way (ilsvm) and multi-task binary "
      "(mt-ilsvm) models."};
  app.require_subcommand(1);
  Options o;

  CLI::App* fit = app.add_subcommand(
      "fit", "fit a model; writes <out>.model.json and <out>.trace.csv");
  add_data_options(fit, o);
  fit->add_option("--mode", o.mode,
                  "full | decoupled (unsupervised features, then a separate "
                  "classifier)");
  add_hyper_options(fit, o);

  CLI::App* predict = app.add_subcommand(
      "predict", "write per-row predictions from a fitted model");
  predict->add_option("--model-file", o.model_file, "fitted model JSON");
  predict->add_option("--data", o.data_path, "dataset path");
  predict->add_option("--config", o.config_path,
                      "JSON file of option defaults; explicit flags win");
  predict->add_option("--out", o.out, "predictions CSV path");

  CLI::App* eval = app.add_subcommand(
      "eval", "score a fitted model on held-out rows; writes a JSON report");
  eval->add_option("--model-file", o.model_file, "fitted model JSON");
  eval->add_option("--data", o.data_path, "dataset path");
  eval->add_option("--split", o.split,
                   "override the evaluation rows: JSON split file or a train "
                   "fraction in (0,1)");
  eval->add_option("--seed", o.seed, "seed used when --split is a fraction");
  eval->add_option("--config", o.config_path,
                   "JSON file of option defaults; explicit flags win");
  eval->add_option("--out", o.out, "evaluation report JSON path");

  CLI::App* synth = app.add_subcommand(
      "synth",
      "generate latent-feature data with a ground-truth sidecar; writes "
      "<out>.libsvm or <out>.csv, <out>.split.json, <out>.truth.json");
  synth->add_option("--model", o.model,
                    "data flavor: ilsvm (multi-way) | mt-ilsvm (multi-task)");
  synth->add_option("--rows", o.synth_rows, "examples to generate");
  synth->add_option("--features", o.synth_features, "observed dimensions");
  synth->add_option("--k-true", o.k_true, "true latent feature count");
  synth->add_option("--alpha", o.alpha, "latent-feature growth rate");
  synth->add_option("--noise-sd", o.noise_sd, "observation noise level");
  synth->add_option("--labels", o.n_labels, "class count (ilsvm flavor)");
  synth->add_option("--tasks", o.n_tasks, "task count (mt-ilsvm flavor)");
  synth->add_option("--seed", o.seed, "seed for all randomness");
  synth->add_option("--split", o.split,
                    "train fraction in (0,1) or a JSON split file (default "
                    "0.7)");
  synth->add_option("--config", o.config_path,
                    "JSON file of option defaults; explicit flags win");
  synth->add_option("--out", o.out, "output path prefix");

  CLI::App* cv = app.add_subcommand(
      "cv",
      "k-fold grid search over alpha and c on the training rows, then refit "
      "with the best pair; writes <out>.cv.json plus the fit artifacts");
  add_data_options(cv, o);
  cv->add_option("--mode", o.mode,
                 "full | decoupled (applies to fold fits and the final fit)");
  add_hyper_options(cv, o);
  cv->add_option("--cv,--folds", o.folds, "fold count");
  cv->add_option("--grid-alpha", o.grid_alpha,
                 "comma-separated alpha grid");
  cv->add_option("--grid-c", o.grid_c, "comma-separated c grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {  // help/version requests
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (fit->parsed()) return run_fit(*fit, o);
    if (predict->parsed()) return run_predict(*predict, o);
    if (eval->parsed()) return run_eval(*eval, o);
    if (synth->parsed()) return run_synth(*synth, o);
    if (cv->parsed()) return run_cv(*cv, o);
    std::cerr << "error: no command given\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
