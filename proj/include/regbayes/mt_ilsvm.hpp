// Multi-task infinite latent SVM: a shared D x K binary projection links the
// tasks, per-example Gaussian loadings reconstruct the inputs through it, and
// independent per-task binary large-margin classifiers act on the projected
// features psi' x.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "regbayes/data.hpp"
#include "regbayes/dense.hpp"
#include "regbayes/ibp.hpp"
#include "regbayes/ilsvm.hpp"
#include "regbayes/parallel.hpp"
#include "regbayes/rng.hpp"
#include "regbayes/special.hpp"
#include "regbayes/svm_dual.hpp"

namespace regbayes {

struct MtConfig {
  double alpha = 1.0;
  double c = 1.0;          // margin-constraint weight; 0 disables supervision
  int truncation = 50;     // K
  double inner_tol = 1e-3;
  int inner_iters = 10;
  double outer_tol = 1e-4;
  int outer_iters = 20;
  bool estimate_hypers = false;
  std::uint64_t seed = 0;
  double svm_tol = 1e-6;
  int svm_max_passes = 1000;
  int n_threads = 0;  // 0 = REGBAYES_THREADS env or 1; projection sweeps only

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (!(c >= 0.0)) throw std::invalid_argument("c must be >= 0");
    if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");
    if (!(inner_tol > 0.0) || !(outer_tol > 0.0))
      throw std::invalid_argument("tolerances must be > 0");
    if (inner_iters < 1 || outer_iters < 1)
      throw std::invalid_argument("iteration caps must be >= 1");
    if (!(svm_tol > 0.0) || svm_max_passes < 1)
      throw std::invalid_argument("svm solver settings out of range");
  }
};

struct MtState {
  StickPosterior sticks;
  Matrix psi;                    // D x K projection means, rows = dimensions
  std::vector<Matrix> loadings;  // per task: N x K loading means phi_mn
  std::vector<std::vector<double>> loading_var;  // per task: N variances
  std::vector<std::vector<double>> lambda_sq;    // per task: N noise variances
  Matrix task_means;                       // M x K classifier means mu_m
  std::vector<std::vector<double>> duals;  // per task, over its train rows
  std::vector<double> sigma_m0_sq;         // per-task prior loading variance
  Matrix u;                                // cached K x K E[Z'Z]
  std::vector<double> trace;  // objective after init and each outer pass
  double kkt_violation = 0.0;  // worst task at the last dual solve

  int n_features() const { return psi.rows; }
  int n_cols() const { return psi.cols; }
  int n_tasks() const { return task_means.rows; }
  int n_examples() const { return loadings.empty() ? 0 : loadings[0].rows; }
};

// Observation hook, called after each coordinate update ("sticks",
// "loadings", "projection") and after "dual" / "hypers" steps.
struct MtFitHooks {
  std::function<void(const char* stage, const MtState&)> on_step;
};

// E[Z'Z] for independent Bernoulli(psi) entries: the diagonal uses the first
// moment (z^2 = z for binary z), off-diagonals the product of means.
inline Matrix projection_gram(const Matrix& psi) {
  const int d_dim = psi.rows, k_dim = psi.cols;
  Matrix u(k_dim, k_dim);
  for (int d = 0; d < d_dim; ++d)
    for (int k = 0; k < k_dim; ++k) {
      const double p = psi(d, k);
      if (p == 0.0) continue;
      u(k, k) += p;
      for (int j = k + 1; j < k_dim; ++j) {
        const double v = p * psi(d, j);
        u(k, j) += v;
        u(j, k) += v;
      }
    }
  return u;
}

inline void refresh_projection_gram(MtState& s) {
  s.u = projection_gram(s.psi);
}

// psi' x for one sparse row: the projected features every classifier sees.
inline std::vector<double> project_row(const Matrix& psi, const SparseRow& x) {
  std::vector<double> v(static_cast<std::size_t>(psi.cols), 0.0);
  for (const auto& [d, xv] : x) {
    if (d < 0 || d >= psi.rows)
      throw std::invalid_argument("feature index beyond projection rows");
    for (int k = 0; k < psi.cols; ++k)
      v[static_cast<std::size_t>(k)] += xv * psi(d, k);
  }
  return v;
}

// f_m(x) = sum_k mu_mk (psi_k' x).
inline double task_discriminant(const MtState& s, int m, const SparseRow& x) {
  if (m < 0 || m >= s.n_tasks()) throw std::out_of_range("task out of range");
  const std::vector<double> v = project_row(s.psi, x);
  double f = 0.0;
  for (int k = 0; k < s.n_cols(); ++k)
    f += s.task_means(m, k) * v[static_cast<std::size_t>(k)];
  return f;
}

inline double task_discriminant(const MtState& s, int m,
                                const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != s.n_features())
    throw std::invalid_argument("feature vector length mismatch");
  SparseRow row;
  for (std::size_t d = 0; d < x.size(); ++d)
    if (x[d] != 0.0) row.emplace_back(static_cast<int>(d), x[d]);
  return task_discriminant(s, m, row);
}

// Sign prediction; a zero score maps to +1.
inline int predict_task(const MtState& s, int m, const SparseRow& x) {
  return task_discriminant(s, m, x) < 0.0 ? -1 : 1;
}

inline Matrix predict_tasks(const MtState& s, const TaskSet& ts) {
  if (ts.n_features != s.n_features())
    throw std::invalid_argument("feature dimension mismatch");
  Matrix pred(ts.n_rows(), s.n_tasks());
  for (int n = 0; n < ts.n_rows(); ++n)
    for (int m = 0; m < s.n_tasks(); ++m)
      pred(n, m) = predict_task(s, m, ts.rows[static_cast<std::size_t>(n)]);
  return pred;
}

namespace detail {

inline std::vector<double> loading_row(const MtState& s, int m, int n) {
  std::vector<double> phi(static_cast<std::size_t>(s.n_cols()));
  for (int k = 0; k < s.n_cols(); ++k)
    phi[static_cast<std::size_t>(k)] =
        s.loadings[static_cast<std::size_t>(m)](n, k);
  return phi;
}

// E[w'Uw] for isotropic q(w) = N(phi, var I):
//   sum_k U_kk (var + phi_k^2) + sum_{j != k} U_jk phi_j phi_k.
inline double expected_quad(const Matrix& u, const std::vector<double>& phi,
                            double var) {
  const int k_dim = u.rows;
  double total = 0.0;
  for (int k = 0; k < k_dim; ++k) {
    const double pk = phi[static_cast<std::size_t>(k)];
    total += u(k, k) * (var + pk * pk);
    for (int j = k + 1; j < k_dim; ++j)
      total += 2.0 * u(j, k) * phi[static_cast<std::size_t>(j)] * pk;
  }
  return total;
}

inline void check_pair(const MtState& s, int m, int n) {
  if (m < 0 || m >= s.n_tasks()) throw std::out_of_range("task out of range");
  if (n < 0 || n >= s.n_examples())
    throw std::out_of_range("example out of range");
}

}  // namespace detail

// Expected log-density of one example under task m's loading posterior and
// the shared projection:
//   -( x'x - 2 sum_k phi_k (psi_k' x) + E[w'Uw] ) / (2 lambda^2)
//   - (D/2) log(2 pi lambda^2).
inline double expected_loglik_mt(const MtState& s, const SparseRow& x, int m,
                                 int n) {
  detail::check_pair(s, m, n);
  const double lam = s.lambda_sq[static_cast<std::size_t>(m)]
                                [static_cast<std::size_t>(n)];
  const std::vector<double> v = project_row(s.psi, x);
  const std::vector<double> phi = detail::loading_row(s, m, n);
  double resid = row_sq_norm(x);
  for (int k = 0; k < s.n_cols(); ++k)
    resid -= 2.0 * phi[static_cast<std::size_t>(k)] *
             v[static_cast<std::size_t>(k)];
  resid += detail::expected_quad(
      s.u, phi,
      s.loading_var[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)]);
  return -resid / (2.0 * lam) -
         0.5 * s.n_features() * std::log(2.0 * detail::kPi * lam);
}

// Gauss-Seidel refresh of one example's loading posterior:
//   phi_k = [ (psi_k' x - sum_{j != k} phi_j U_kj) / lambda^2 ]
//           / (1/sigma_m0^2 + U_kk/lambda^2),
//   var   = 1 / (1/sigma_m0^2 + (sum_k U_kk / K) / lambda^2).
inline void update_loadings_mt(MtState& s, const SparseRow& x, int m, int n) {
  detail::check_pair(s, m, n);
  const int k_dim = s.n_cols();
  const double prior_inv = 1.0 / s.sigma_m0_sq[static_cast<std::size_t>(m)];
  const double lam_inv =
      1.0 / s.lambda_sq[static_cast<std::size_t>(m)]
                       [static_cast<std::size_t>(n)];
  const std::vector<double> v = project_row(s.psi, x);
  Matrix& phi = s.loadings[static_cast<std::size_t>(m)];
  double tr = 0.0;
  for (int k = 0; k < k_dim; ++k) {
    tr += s.u(k, k);
    double num = v[static_cast<std::size_t>(k)];
    for (int j = 0; j < k_dim; ++j)
      if (j != k) num -= phi(n, j) * s.u(k, j);
    phi(n, k) = num * lam_inv / (prior_inv + s.u(k, k) * lam_inv);
  }
  s.loading_var[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)] =
      1.0 / (prior_inv + tr / k_dim * lam_inv);
}

// Sigmoid mean-field refresh of every projection entry.  For entry (d, k),
//   theta = stick logit_k
//         - sum_{m,n} [ (var_mn + phi_k^2) - 2 x_nd phi_k
//                       + 2 sum_{j != k} phi_j phi_k psi_dj ] / (2 lambda^2)
//         + sum_{m, n in train_m} omega y_mn mu_mk x_nd   (margin force),
// with the j != k sum over the row's current values (Gauss-Seidel in k).
// Rows are independent, so the sweep may be sharded across threads without
// changing any value.  Recomputes the cached E[Z'Z] afterwards.
inline void update_projection(MtState& s, const TaskSet& ts,
                              const MultinomialBound& bound, bool with_margin,
                              int n_threads = 1) {
  const int d_dim = s.n_features(), k_dim = s.n_cols(), m_dim = s.n_tasks();
  const int n_rows = s.n_examples();
  const std::vector<double> logits = stick_feature_logits(s.sticks, bound);
  // Row-free pieces, accumulated over all (task, example) pairs:
  //   base_k      = sum (var + phi_k^2) / (2 lambda^2)
  //   xphi(d, k)  = sum x_nd phi_k / lambda^2
  //   cross(j, k) = sum phi_j phi_k / lambda^2
  //   margin(d,k) = sum omega y mu_mk x_nd over active train duals
  std::vector<double> base(static_cast<std::size_t>(k_dim), 0.0);
  Matrix xphi(d_dim, k_dim), cross(k_dim, k_dim), margin;
  for (int m = 0; m < m_dim; ++m) {
    const Matrix& phi = s.loadings[static_cast<std::size_t>(m)];
    for (int n = 0; n < n_rows; ++n) {
      const double inv =
          1.0 / s.lambda_sq[static_cast<std::size_t>(m)]
                           [static_cast<std::size_t>(n)];
      const double var =
          s.loading_var[static_cast<std::size_t>(m)]
                       [static_cast<std::size_t>(n)];
      for (int k = 0; k < k_dim; ++k) {
        const double pk = phi(n, k);
        base[static_cast<std::size_t>(k)] += (var + pk * pk) * (0.5 * inv);
        for (int j = 0; j < k_dim; ++j)
          cross(j, k) += phi(n, j) * pk * inv;
      }
      for (const auto& [d, xv] : ts.rows[static_cast<std::size_t>(n)])
        for (int k = 0; k < k_dim; ++k)
          xphi(d, k) += xv * phi(n, k) * inv;
    }
  }
  if (with_margin) {
    margin = Matrix(d_dim, k_dim);
    for (int m = 0; m < m_dim; ++m) {
      const auto& tr = ts.train_idx[static_cast<std::size_t>(m)];
      for (std::size_t i = 0; i < tr.size(); ++i) {
        const double w = s.duals[static_cast<std::size_t>(m)][i];
        if (w == 0.0) continue;
        const int n = tr[i];
        const double wy = w * ts.y(n, m);
        for (const auto& [d, xv] : ts.rows[static_cast<std::size_t>(n)])
          for (int k = 0; k < k_dim; ++k)
            margin(d, k) += wy * s.task_means(m, k) * xv;
      }
    }
  }
  detail::parallel_for(d_dim, resolve_threads(n_threads), [&](int d) {
    for (int k = 0; k < k_dim; ++k) {
      double inter = 0.0;  // sum_{j != k} psi_dj cross(j, k), current row
      for (int j = 0; j < k_dim; ++j) inter += s.psi(d, j) * cross(j, k);
      inter -= s.psi(d, k) * cross(k, k);
      double theta = logits[static_cast<std::size_t>(k)] -
                     base[static_cast<std::size_t>(k)] + xphi(d, k) - inter;
      if (!margin.empty() && margin(d, k) != 0.0) theta += margin(d, k);
      s.psi(d, k) = sigmoid(theta);
    }
  });
  refresh_projection_gram(s);
}

// One independent binary box dual per task on the projected features
// v = psi' x; the classifier mean is mu_m = sum_n y omega v.  Tasks share no
// dual variables, so they may be solved in any order.
inline void update_task_classifiers(MtState& s, const TaskSet& ts, double c,
                                    double tol = 1e-6, int max_passes = 1000) {
  const int k_dim = s.n_cols();
  double worst = 0.0;
  for (int m = 0; m < s.n_tasks(); ++m) {
    const auto& tr = ts.train_idx[static_cast<std::size_t>(m)];
    auto& duals = s.duals[static_cast<std::size_t>(m)];
    if (c == 0.0 || tr.empty()) {
      duals.assign(tr.size(), 0.0);
      for (int k = 0; k < k_dim; ++k) s.task_means(m, k) = 0.0;
      continue;
    }
    BinaryDualProblem p;
    p.c = c;
    for (int n : tr) {
      p.v.push_back(project_row(s.psi, ts.rows[static_cast<std::size_t>(n)]));
      p.y.push_back(ts.y(n, m) < 0.0 ? -1 : 1);
    }
    const bool warm = duals.size() == tr.size();
    const DualSolution sol =
        solve_binary_box(p, tol, max_passes, warm ? &duals : nullptr);
    duals = sol.omega;
    worst = std::max(worst, sol.kkt_violation);
    const std::vector<double> mu = classifier_mean(p, sol.omega);
    for (int k = 0; k < k_dim; ++k)
      s.task_means(m, k) = mu[static_cast<std::size_t>(k)];
  }
  s.kkt_violation = worst;
}

// Closed-form hyper refresh: per-task prior loading variance from the
// loading posteriors, per-example noise from the expected residual.
inline void estimate_hypers_mt(MtState& s, const TaskSet& ts) {
  const int k_dim = s.n_cols(), d_dim = s.n_features();
  const int n_rows = s.n_examples();
  for (int m = 0; m < s.n_tasks(); ++m) {
    double acc = 0.0;
    for (int n = 0; n < n_rows; ++n) {
      const std::vector<double> phi = detail::loading_row(s, m, n);
      double sq = 0.0;
      for (double p : phi) sq += p * p;
      acc += k_dim * s.loading_var[static_cast<std::size_t>(m)]
                                  [static_cast<std::size_t>(n)] +
             sq;
    }
    s.sigma_m0_sq[static_cast<std::size_t>(m)] =
        std::max(acc / (static_cast<double>(k_dim) * n_rows), 1e-8);
    for (int n = 0; n < n_rows; ++n) {
      const SparseRow& x = ts.rows[static_cast<std::size_t>(n)];
      const std::vector<double> v = project_row(s.psi, x);
      const std::vector<double> phi = detail::loading_row(s, m, n);
      double resid = row_sq_norm(x);
      for (int k = 0; k < k_dim; ++k)
        resid -= 2.0 * phi[static_cast<std::size_t>(k)] *
                 v[static_cast<std::size_t>(k)];
      resid += detail::expected_quad(
          s.u, phi,
          s.loading_var[static_cast<std::size_t>(m)]
                       [static_cast<std::size_t>(n)]);
      s.lambda_sq[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)] =
          std::max(resid / d_dim, 1e-8);
    }
  }
}

namespace detail {

inline double loading_kl_mt(const MtState& s) {
  const double k_dim = s.n_cols();
  double kl = 0.0;
  for (int m = 0; m < s.n_tasks(); ++m) {
    const double prior = s.sigma_m0_sq[static_cast<std::size_t>(m)];
    for (int n = 0; n < s.n_examples(); ++n) {
      const double var = s.loading_var[static_cast<std::size_t>(m)]
                                      [static_cast<std::size_t>(n)];
      double sq = 0.0;
      for (int k = 0; k < s.n_cols(); ++k) {
        const double p = s.loadings[static_cast<std::size_t>(m)](n, k);
        sq += p * p;
      }
      kl += (k_dim * var + sq) / (2.0 * prior) -
            0.5 * k_dim * (1.0 + std::log(var / prior));
    }
  }
  return kl;
}

inline double task_kl(const MtState& s) {
  double sq = 0.0;
  for (double v : s.task_means.data) sq += v * v;
  return 0.5 * sq;
}

inline double hinge_mt(const MtState& s, const TaskSet& ts, double c) {
  if (c == 0.0) return 0.0;
  double total = 0.0;
  for (int m = 0; m < s.n_tasks(); ++m)
    for (int n : ts.train_idx[static_cast<std::size_t>(m)]) {
      const double f =
          task_discriminant(s, m, ts.rows[static_cast<std::size_t>(n)]);
      const double gap = 1.0 - ts.y(n, m) * f;
      if (gap > 0.0) total += gap;
    }
  return c * total;
}

}  // namespace detail

// Upper-bound surrogate objective: stick KL + bounded projection KL +
// loading KL + classifier KL - expected log-likelihood + scaled hinge over
// the tasks' training cells.
inline double objective_mt(const MtState& s, const TaskSet& ts, double c) {
  const MultinomialBound bound = multinomial_bound(s.sticks);
  double obj = kl_sticks(s.sticks) + kl_features(s.psi, s.sticks, bound) +
               detail::loading_kl_mt(s) + detail::task_kl(s);
  for (int m = 0; m < s.n_tasks(); ++m)
    for (int n = 0; n < s.n_examples(); ++n)
      obj -= expected_loglik_mt(s, ts.rows[static_cast<std::size_t>(n)], m, n);
  const double hinge = detail::hinge_mt(s, ts, c);
  if (hinge != 0.0) obj += hinge;
  return obj;
}

// Same bound with the hinge replaced by its dual linearization
// sum_{m,n} omega_mn (1 - y_mn f_m(x_mn)); block-coordinate updates at fixed
// duals never increase this.
inline double lagrangian_mt(const MtState& s, const TaskSet& ts) {
  const MultinomialBound bound = multinomial_bound(s.sticks);
  double obj = kl_sticks(s.sticks) + kl_features(s.psi, s.sticks, bound) +
               detail::loading_kl_mt(s) + detail::task_kl(s);
  for (int m = 0; m < s.n_tasks(); ++m)
    for (int n = 0; n < s.n_examples(); ++n)
      obj -= expected_loglik_mt(s, ts.rows[static_cast<std::size_t>(n)], m, n);
  for (int m = 0; m < s.n_tasks(); ++m) {
    const auto& tr = ts.train_idx[static_cast<std::size_t>(m)];
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const double w = s.duals[static_cast<std::size_t>(m)][i];
      if (w == 0.0) continue;
      const int n = tr[i];
      const double f =
          task_discriminant(s, m, ts.rows[static_cast<std::size_t>(n)]);
      obj += w * (1.0 - ts.y(n, m) * f);
    }
  }
  return obj;
}

inline MtState init_mt(const TaskSet& ts, const MtConfig& cfg) {
  MtState s;
  s.sticks = StickPosterior(cfg.truncation, cfg.alpha);
  s.psi = Matrix(ts.n_features, cfg.truncation);
  Rng rng(cfg.seed);
  for (double& p : s.psi.data) p = 0.5 + rng.normal(0.0, 0.001);
  const int m_dim = ts.n_tasks();
  const int n_rows = ts.n_rows();
  s.loadings.assign(static_cast<std::size_t>(m_dim),
                    Matrix(n_rows, cfg.truncation));
  s.loading_var.assign(static_cast<std::size_t>(m_dim),
                       std::vector<double>(static_cast<std::size_t>(n_rows),
                                           1.0));
  s.task_means = Matrix(m_dim, cfg.truncation);
  s.duals.resize(static_cast<std::size_t>(m_dim));
  for (int m = 0; m < m_dim; ++m)
    s.duals[static_cast<std::size_t>(m)].assign(
        ts.train_idx[static_cast<std::size_t>(m)].size(), 0.0);
  s.sigma_m0_sq.assign(static_cast<std::size_t>(m_dim), 1.0);
  // Per-example empirical feature variance seeds the noise, floored so the
  // precision stays finite on constant rows; shared across tasks.
  std::vector<double> noise(static_cast<std::size_t>(n_rows));
  for (int n = 0; n < n_rows; ++n) {
    double sum = 0.0, sq = 0.0;
    for (const auto& [d, xv] : ts.rows[static_cast<std::size_t>(n)]) {
      sum += xv;
      sq += xv * xv;
    }
    const double mean = sum / ts.n_features;
    noise[static_cast<std::size_t>(n)] =
        std::max(sq / ts.n_features - mean * mean, 1e-6);
  }
  s.lambda_sq.assign(static_cast<std::size_t>(m_dim), noise);
  refresh_projection_gram(s);
  return s;
}

// Nested variational loop over the shared projection: inner coordinate
// sweeps (sticks, loadings, projection) to tolerance, then one dual solve
// per task (plus optional hyperparameter refresh) per outer pass.
inline MtState fit_mt(const TaskSet& ts, const MtConfig& cfg,
                      const MtFitHooks* hooks = nullptr) {
  cfg.validate();
  if (ts.n_features < 1) throw std::invalid_argument("no features");
  if (ts.n_tasks() < 1) throw std::invalid_argument("no tasks");
  if (ts.rows.empty()) throw std::invalid_argument("no examples");
  if (static_cast<int>(ts.train_idx.size()) != ts.n_tasks() ||
      ts.y.rows != ts.n_rows() || ts.y.cols != ts.n_tasks())
    throw std::invalid_argument("task set shape mismatch");
  for (int m = 0; m < ts.n_tasks(); ++m) {
    const auto& tr = ts.train_idx[static_cast<std::size_t>(m)];
    if (tr.empty()) throw std::invalid_argument("task has no training rows");
    for (int n : tr) {
      if (n < 0 || n >= ts.n_rows())
        throw std::invalid_argument("train index out of range");
      if (ts.y(n, m) == 0.0)
        throw std::invalid_argument("train cell has no label");
    }
  }
  for (const SparseRow& row : ts.rows)
    for (const auto& [d, xv] : row) {
      if (d < 0 || d >= ts.n_features)
        throw std::invalid_argument("feature index out of range");
      if (!std::isfinite(xv))
        throw std::invalid_argument("non-finite feature");
    }

  MtState s = init_mt(ts, cfg);
  const int threads = resolve_threads(cfg.n_threads);
  const auto step = [&](const char* stage) {
    if (hooks && hooks->on_step) hooks->on_step(stage, s);
  };
  const auto rel_change = [](double cur, double prev) {
    return std::fabs(cur - prev) / std::max(1.0, std::fabs(prev));
  };

  double outer_prev = objective_mt(s, ts, cfg.c);
  s.trace.push_back(outer_prev);
  for (int outer = 0; outer < cfg.outer_iters; ++outer) {
    double inner_prev = outer_prev;
    for (int it = 0; it < cfg.inner_iters; ++it) {
      MultinomialBound bound = multinomial_bound(s.sticks);
      s.sticks = update_sticks(s.sticks, s.psi, bound);
      step("sticks");
      bound = multinomial_bound(s.sticks);
      for (int m = 0; m < s.n_tasks(); ++m)
        for (int n = 0; n < s.n_examples(); ++n)
          update_loadings_mt(s, ts.rows[static_cast<std::size_t>(n)], m, n);
      step("loadings");
      update_projection(s, ts, bound, cfg.c != 0.0, threads);
      step("projection");
      const double cur = objective_mt(s, ts, cfg.c);
      const bool done = rel_change(cur, inner_prev) < cfg.inner_tol;
      inner_prev = cur;
      if (done) break;
    }
    if (cfg.c != 0.0) {
      update_task_classifiers(s, ts, cfg.c, cfg.svm_tol, cfg.svm_max_passes);
      step("dual");
    }
    if (cfg.estimate_hypers) {
      estimate_hypers_mt(s, ts);
      step("hypers");
    }
    const double cur = objective_mt(s, ts, cfg.c);
    s.trace.push_back(cur);
    const bool done = rel_change(cur, outer_prev) < cfg.outer_tol;
    outer_prev = cur;
    if (done) break;
  }
  return s;
}

// Two-stage baseline: unsupervised fit (margin forces off), then a single
// per-task dual solve on the frozen projection.
inline MtState decoupled_baseline(const TaskSet& ts, MtConfig cfg,
                                  const MtFitHooks* hooks = nullptr) {
  const double margin_c = cfg.c;
  cfg.c = 0.0;
  MtState s = fit_mt(ts, cfg, hooks);
  if (margin_c != 0.0)
    update_task_classifiers(s, ts, margin_c, cfg.svm_tol, cfg.svm_max_passes);
  return s;
}

}  // namespace regbayes
