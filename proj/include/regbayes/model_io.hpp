// Model serialization: JSON files that round-trip the full posterior state of
// either model, objective-trace CSVs, evaluation reports, and ground-truth
// sidecars for synthetic data.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "regbayes/data.hpp"
#include "regbayes/dense.hpp"
#include "regbayes/ibp.hpp"
#include "regbayes/ilsvm.hpp"
#include "regbayes/metrics.hpp"
#include "regbayes/mt_ilsvm.hpp"

namespace regbayes {

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end())
    throw std::runtime_error(std::string("model file: missing field '") + key +
                             "'");
  return *it;
}

inline nlohmann::json sticks_to_json(const StickPosterior& sp) {
  nlohmann::json j;
  j["alpha"] = sp.alpha;
  j["gamma1"] = sp.gamma1;
  j["gamma2"] = sp.gamma2;
  return j;
}

inline StickPosterior sticks_from_json(const nlohmann::json& j) {
  StickPosterior sp;
  sp.alpha = field(j, "alpha").get<double>();
  sp.gamma1 = field(j, "gamma1").get<std::vector<double>>();
  sp.gamma2 = field(j, "gamma2").get<std::vector<double>>();
  sp.validate();
  return sp;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw std::runtime_error(path + ": write failed");
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

}  // namespace detail

// Reads just the model tag ("ilsvm" or "mt-ilsvm") so callers can dispatch
// without knowing the file's flavor up front.
inline std::string model_kind(const std::string& path) {
  const nlohmann::json j = detail::read_json(path);
  if (detail::field(j, "format").get<std::string>() != "regbayes-model")
    throw std::runtime_error(path + ": not a model file");
  return detail::field(j, "model").get<std::string>();
}

// A fitted multi-way model together with the dataset bookkeeping needed to
// interpret it: feature count, the original numeric label values behind the
// internal 1..L codes, and the split it was trained under.
struct IlsvmModel {
  IlsvmConfig config;
  IlsvmState state;
  int n_features = 0;
  std::vector<double> label_values;
  std::vector<int> train_idx, test_idx;
};

// Same for the multi-task model: task names plus per-task splits.
struct MtModel {
  MtConfig config;
  MtState state;
  int n_features = 0;
  std::vector<std::string> task_names;
  std::vector<std::vector<int>> train_idx, test_idx;
};

inline void save_model(const IlsvmModel& m, const std::string& path) {
  nlohmann::json j;
  j["format"] = "regbayes-model";
  j["model"] = "ilsvm";

  nlohmann::json cfg;
  cfg["alpha"] = m.config.alpha;
  cfg["c"] = m.config.c;
  cfg["truncation"] = m.config.truncation;
  cfg["inner_tol"] = m.config.inner_tol;
  cfg["inner_iters"] = m.config.inner_iters;
  cfg["outer_tol"] = m.config.outer_tol;
  cfg["outer_iters"] = m.config.outer_iters;
  cfg["estimate_hypers"] = m.config.estimate_hypers;
  cfg["seed"] = m.config.seed;
  cfg["svm_tol"] = m.config.svm_tol;
  cfg["svm_max_passes"] = m.config.svm_max_passes;
  cfg["cost"] = detail::matrix_to_json(m.config.cost);
  cfg["svd_init"] = m.config.svd_init;
  j["config"] = std::move(cfg);

  nlohmann::json st;
  st["sticks"] = detail::sticks_to_json(m.state.sticks);
  st["psi"] = detail::matrix_to_json(m.state.psi);
  st["loadings"] = detail::matrix_to_json(m.state.loadings);
  st["sigma_sq"] = m.state.sigma_sq;
  st["eta_mean"] = detail::matrix_to_json(m.state.eta_mean);
  st["duals"] = m.state.duals;
  st["sigma0_sq"] = m.state.sigma0_sq;
  st["sigma_n0_sq"] = m.state.sigma_n0_sq;
  st["trace"] = m.state.trace;
  st["kkt_violation"] = m.state.kkt_violation;
  j["state"] = std::move(st);

  nlohmann::json data;
  data["n_features"] = m.n_features;
  data["label_values"] = m.label_values;
  data["train_idx"] = m.train_idx;
  data["test_idx"] = m.test_idx;
  j["data"] = std::move(data);

  detail::write_json(j, path);
}

inline IlsvmModel load_ilsvm_model(const std::string& path) {
  const nlohmann::json j = detail::read_json(path);
  if (detail::field(j, "format").get<std::string>() != "regbayes-model")
    throw std::runtime_error(path + ": not a model file");
  if (detail::field(j, "model").get<std::string>() != "ilsvm")
    throw std::runtime_error(path + ": not a multi-way model");

  IlsvmModel m;
  const nlohmann::json& cfg = detail::field(j, "config");
  m.config.alpha = detail::field(cfg, "alpha").get<double>();
  m.config.c = detail::field(cfg, "c").get<double>();
  m.config.truncation = detail::field(cfg, "truncation").get<int>();
  m.config.inner_tol = detail::field(cfg, "inner_tol").get<double>();
  m.config.inner_iters = detail::field(cfg, "inner_iters").get<int>();
  m.config.outer_tol = detail::field(cfg, "outer_tol").get<double>();
  m.config.outer_iters = detail::field(cfg, "outer_iters").get<int>();
  m.config.estimate_hypers = detail::field(cfg, "estimate_hypers").get<bool>();
  m.config.seed = detail::field(cfg, "seed").get<std::uint64_t>();
  m.config.svm_tol = detail::field(cfg, "svm_tol").get<double>();
  m.config.svm_max_passes = detail::field(cfg, "svm_max_passes").get<int>();
  m.config.cost = detail::matrix_from_json(detail::field(cfg, "cost"));
  m.config.svd_init = detail::field(cfg, "svd_init").get<bool>();

  const nlohmann::json& st = detail::field(j, "state");
  m.state.sticks = detail::sticks_from_json(detail::field(st, "sticks"));
  m.state.psi = detail::matrix_from_json(detail::field(st, "psi"));
  m.state.loadings = detail::matrix_from_json(detail::field(st, "loadings"));
  m.state.sigma_sq = detail::field(st, "sigma_sq").get<std::vector<double>>();
  m.state.eta_mean = detail::matrix_from_json(detail::field(st, "eta_mean"));
  m.state.duals = detail::field(st, "duals").get<std::vector<double>>();
  m.state.sigma0_sq = detail::field(st, "sigma0_sq").get<double>();
  m.state.sigma_n0_sq =
      detail::field(st, "sigma_n0_sq").get<std::vector<double>>();
  m.state.trace = detail::field(st, "trace").get<std::vector<double>>();
  m.state.kkt_violation = detail::field(st, "kkt_violation").get<double>();

  const nlohmann::json& data = detail::field(j, "data");
  m.n_features = detail::field(data, "n_features").get<int>();
  m.label_values = detail::field(data, "label_values").get<std::vector<double>>();
  m.train_idx = detail::field(data, "train_idx").get<std::vector<int>>();
  m.test_idx = detail::field(data, "test_idx").get<std::vector<int>>();
  return m;
}

inline void save_model(const MtModel& m, const std::string& path) {
  nlohmann::json j;
  j["format"] = "regbayes-model";
  j["model"] = "mt-ilsvm";

  nlohmann::json cfg;
  cfg["alpha"] = m.config.alpha;
  cfg["c"] = m.config.c;
  cfg["truncation"] = m.config.truncation;
  cfg["inner_tol"] = m.config.inner_tol;
  cfg["inner_iters"] = m.config.inner_iters;
  cfg["outer_tol"] = m.config.outer_tol;
  cfg["outer_iters"] = m.config.outer_iters;
  cfg["estimate_hypers"] = m.config.estimate_hypers;
  cfg["seed"] = m.config.seed;
  cfg["svm_tol"] = m.config.svm_tol;
  cfg["svm_max_passes"] = m.config.svm_max_passes;
  j["config"] = std::move(cfg);

  nlohmann::json st;
  st["sticks"] = detail::sticks_to_json(m.state.sticks);
  st["psi"] = detail::matrix_to_json(m.state.psi);
  nlohmann::json loads = nlohmann::json::array();
  for (const Matrix& lm : m.state.loadings)
    loads.push_back(detail::matrix_to_json(lm));
  st["loadings"] = std::move(loads);
  st["loading_var"] = m.state.loading_var;
  st["lambda_sq"] = m.state.lambda_sq;
  st["task_means"] = detail::matrix_to_json(m.state.task_means);
  st["duals"] = m.state.duals;
  st["sigma_m0_sq"] = m.state.sigma_m0_sq;
  st["trace"] = m.state.trace;
  st["kkt_violation"] = m.state.kkt_violation;
  j["state"] = std::move(st);

  nlohmann::json data;
  data["n_features"] = m.n_features;
  data["task_names"] = m.task_names;
  data["train_idx"] = m.train_idx;
  data["test_idx"] = m.test_idx;
  j["data"] = std::move(data);

  detail::write_json(j, path);
}

inline MtModel load_mt_model(const std::string& path) {
  const nlohmann::json j = detail::read_json(path);
  if (detail::field(j, "format").get<std::string>() != "regbayes-model")
    throw std::runtime_error(path + ": not a model file");
  if (detail::field(j, "model").get<std::string>() != "mt-ilsvm")
    throw std::runtime_error(path + ": not a multi-task model");

  MtModel m;
  const nlohmann::json& cfg = detail::field(j, "config");
  m.config.alpha = detail::field(cfg, "alpha").get<double>();
  m.config.c = detail::field(cfg, "c").get<double>();
  m.config.truncation = detail::field(cfg, "truncation").get<int>();
  m.config.inner_tol = detail::field(cfg, "inner_tol").get<double>();
  m.config.inner_iters = detail::field(cfg, "inner_iters").get<int>();
  m.config.outer_tol = detail::field(cfg, "outer_tol").get<double>();
  m.config.outer_iters = detail::field(cfg, "outer_iters").get<int>();
  m.config.estimate_hypers = detail::field(cfg, "estimate_hypers").get<bool>();
  m.config.seed = detail::field(cfg, "seed").get<std::uint64_t>();
  m.config.svm_tol = detail::field(cfg, "svm_tol").get<double>();
  m.config.svm_max_passes = detail::field(cfg, "svm_max_passes").get<int>();

  const nlohmann::json& st = detail::field(j, "state");
  m.state.sticks = detail::sticks_from_json(detail::field(st, "sticks"));
  m.state.psi = detail::matrix_from_json(detail::field(st, "psi"));
  for (const nlohmann::json& lm : detail::field(st, "loadings"))
    m.state.loadings.push_back(detail::matrix_from_json(lm));
  m.state.loading_var =
      detail::field(st, "loading_var").get<std::vector<std::vector<double>>>();
  m.state.lambda_sq =
      detail::field(st, "lambda_sq").get<std::vector<std::vector<double>>>();
  m.state.task_means = detail::matrix_from_json(detail::field(st, "task_means"));
  m.state.duals =
      detail::field(st, "duals").get<std::vector<std::vector<double>>>();
  m.state.sigma_m0_sq =
      detail::field(st, "sigma_m0_sq").get<std::vector<double>>();
  m.state.trace = detail::field(st, "trace").get<std::vector<double>>();
  m.state.kkt_violation = detail::field(st, "kkt_violation").get<double>();
  refresh_projection_gram(m.state);  // cache is a pure function of psi

  const nlohmann::json& data = detail::field(j, "data");
  m.n_features = detail::field(data, "n_features").get<int>();
  m.task_names =
      detail::field(data, "task_names").get<std::vector<std::string>>();
  m.train_idx =
      detail::field(data, "train_idx").get<std::vector<std::vector<int>>>();
  m.test_idx =
      detail::field(data, "test_idx").get<std::vector<std::vector<int>>>();
  return m;
}

// Objective trace as a two-column CSV; %.17g keeps reruns byte-identical.
inline void save_trace_csv(const std::vector<double>& trace,
                           const std::string& path) {
  std::ofstream out = detail::open_out(path);
  out << "iteration,objective\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << i << ',' << detail::fmt_g17(buf, trace[i]) << '\n';
  out.flush();
  if (!out) throw std::runtime_error(path + ": write failed");
}

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["accuracy"] = r.accuracy;
  j["f1_macro"] = r.f1_macro;
  j["f1_micro"] = r.f1_micro;
  if (r.explained_variance_pct)
    j["explained_variance_pct"] = *r.explained_variance_pct;
  else
    j["explained_variance_pct"] = nullptr;
  nlohmann::json tasks = nlohmann::json::array();
  for (const TaskScores& t : r.per_task) {
    nlohmann::json tj;
    tj["name"] = t.name;
    tj["tp"] = t.tp;
    tj["fp"] = t.fp;
    tj["fn"] = t.fn;
    tj["tn"] = t.tn;
    tj["f1"] = t.f1;
    tasks.push_back(std::move(tj));
  }
  j["per_task"] = std::move(tasks);
  return j;
}

inline void save_eval_report(const EvalReport& r, const std::string& path) {
  detail::write_json(eval_report_to_json(r), path);
}

}  // namespace regbayes
