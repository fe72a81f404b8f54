// Multi-way infinite latent SVM: truncated mean-field inference over sticks,
// binary features, Gaussian loadings, and a large-margin classifier.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "regbayes/data.hpp"
#include "regbayes/dense.hpp"
#include "regbayes/ibp.hpp"
#include "regbayes/parallel.hpp"
#include "regbayes/rng.hpp"
#include "regbayes/special.hpp"
#include "regbayes/svm_dual.hpp"

namespace regbayes {

struct IlsvmConfig {
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
  Matrix cost;        // optional L x L misclassification costs; empty = 0/1
  bool svd_init = false;  // warm-start loadings from leading singular vectors
  int n_threads = 0;  // 0 = REGBAYES_THREADS env or 1; feature sweeps only

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

// Training rows with their 1..L labels; everything else is a test row that
// joins the likelihood sweeps but never the margin terms.
struct TrainView {
  std::vector<int> rows;
  std::vector<int> labels;
  int n_labels = 0;
};

inline TrainView train_view(const Dataset& ds) {
  TrainView v;
  v.rows = ds.train_idx;
  v.n_labels = ds.n_labels;
  for (int i : ds.train_idx)
    v.labels.push_back(ds.labels[static_cast<std::size_t>(i)]);
  return v;
}

struct IlsvmState {
  StickPosterior sticks;
  Matrix psi;                       // N x K feature activation means
  Matrix loadings;                  // D x K column means
  std::vector<double> sigma_sq;     // per-column loading variances
  Matrix eta_mean;                  // L x K classifier mean
  std::vector<double> duals;        // omega, train-row-major n*L + y
  double sigma0_sq = 1.0;           // prior loading variance
  std::vector<double> sigma_n0_sq;  // per-example noise variances
  std::vector<double> trace;        // objective after init and each outer pass
  double kkt_violation = 0.0;

  int n_rows() const { return psi.rows; }
  int n_features() const { return loadings.rows; }
  int n_cols() const { return psi.cols; }
  int n_labels() const { return eta_mean.rows; }
};

// Observation hook, called after each coordinate update ("sticks",
// "loadings", "features") and after "dual" / "hypers" steps.
struct FitHooks {
  std::function<void(const char* stage, const IlsvmState&)> on_step;
};

inline double discriminant(const IlsvmState& s, int n, int label) {
  if (n < 0 || n >= s.n_rows()) throw std::out_of_range("example out of range");
  if (label < 1 || label > s.n_labels())
    throw std::out_of_range("label out of range");
  double f = 0.0;
  for (int k = 0; k < s.n_cols(); ++k)
    f += s.eta_mean(label - 1, k) * s.psi(n, k);
  return f;
}

inline int predict_label(const IlsvmState& s, int n) {
  int best = 1;
  double best_f = discriminant(s, n, 1);
  for (int y = 2; y <= s.n_labels(); ++y) {
    const double f = discriminant(s, n, y);
    if (f > best_f) {
      best_f = f;
      best = y;
    }
  }
  return best;
}

inline std::vector<int> predict_labels(const IlsvmState& s) {
  std::vector<int> out(static_cast<std::size_t>(s.n_rows()));
  for (int n = 0; n < s.n_rows(); ++n)
    out[static_cast<std::size_t>(n)] = predict_label(s, n);
  return out;
}

namespace detail {

// Squared norms of the loading columns; t_k = D sigma_k^2 + ||Phi_k||^2 is
// the expected squared norm of latent column k under q(W).
inline std::vector<double> loading_col_sq(const IlsvmState& s) {
  std::vector<double> g(static_cast<std::size_t>(s.n_cols()), 0.0);
  for (int k = 0; k < s.n_cols(); ++k) {
    double v = 0.0;
    for (int d = 0; d < s.n_features(); ++d)
      v += s.loadings(d, k) * s.loadings(d, k);
    g[static_cast<std::size_t>(k)] = v;
  }
  return g;
}

// E_q || x_n - W z_n ||^2 = ||x - Phi psi||^2
//   + sum_k psi_k (D sigma_k^2 + (1 - psi_k) ||Phi_k||^2),
// the exact Gaussian-mixture residual; always nonnegative.
inline double expected_residual(const IlsvmState& s, const Matrix& x, int n,
                                const std::vector<double>& col_sq) {
  const int d_dim = s.n_features();
  const int k_dim = s.n_cols();
  double resid = 0.0;
  for (int d = 0; d < d_dim; ++d) {
    double m = 0.0;
    for (int k = 0; k < k_dim; ++k) m += s.loadings(d, k) * s.psi(n, k);
    const double r = x(n, d) - m;
    resid += r * r;
  }
  for (int k = 0; k < k_dim; ++k) {
    const double p = s.psi(n, k);
    resid += p * (d_dim * s.sigma_sq[static_cast<std::size_t>(k)] +
                  (1.0 - p) * col_sq[static_cast<std::size_t>(k)]);
  }
  return resid;
}

constexpr double kPi = 3.141592653589793238462643383279502884;

inline double loglik_row(const IlsvmState& s, const Matrix& x, int n,
                         const std::vector<double>& col_sq) {
  const double v = s.sigma_n0_sq[static_cast<std::size_t>(n)];
  return -expected_residual(s, x, n, col_sq) / (2.0 * v) -
         0.5 * s.n_features() * std::log(2.0 * kPi * v);
}

inline double label_cost(const Matrix& cost, int y_true, int y) {
  if (y == y_true) return 0.0;
  return cost.empty() ? 1.0 : cost(y_true - 1, y - 1);
}

}  // namespace detail

inline double expected_loglik(const IlsvmState& s, const Matrix& x, int n) {
  if (n < 0 || n >= s.n_rows()) throw std::out_of_range("example out of range");
  return detail::loglik_row(s, x, n, detail::loading_col_sq(s));
}

// Coordinate update of the loading posterior, one column at a time:
//   Phi_k = [ sum_n (psi_nk / s_n0) (x_n - sum_{j != k} psi_nj Phi_j) ]
//           / (1/sigma0^2 + sum_n psi_nk / s_n0),      sigma_k^2 = 1 / (same).
inline void update_loadings(IlsvmState& s, const Matrix& x) {
  const int n_rows = s.n_rows(), d_dim = s.n_features(), k_dim = s.n_cols();
  // b(k,j) = sum_n psi_nk psi_nj / s_n0;  v(k,.) = sum_n (psi_nk/s_n0) x_n;
  // a_k = sum_n psi_nk / s_n0 (E[z^2] = E[z] for binary features, so the
  // precision uses the first moment, not the Gram diagonal).
  Matrix b(k_dim, k_dim), v(k_dim, d_dim);
  std::vector<double> a(static_cast<std::size_t>(k_dim), 0.0);
  for (int n = 0; n < n_rows; ++n) {
    const double inv = 1.0 / s.sigma_n0_sq[static_cast<std::size_t>(n)];
    for (int k = 0; k < k_dim; ++k) {
      const double w = s.psi(n, k) * inv;
      if (w == 0.0) continue;
      a[static_cast<std::size_t>(k)] += w;
      for (int j = 0; j < k_dim; ++j) b(k, j) += w * s.psi(n, j);
      for (int d = 0; d < d_dim; ++d) v(k, d) += w * x(n, d);
    }
  }
  for (int k = 0; k < k_dim; ++k) {
    const double den = 1.0 / s.sigma0_sq + a[static_cast<std::size_t>(k)];
    s.sigma_sq[static_cast<std::size_t>(k)] = 1.0 / den;
    for (int d = 0; d < d_dim; ++d) {
      double num = v(k, d);
      for (int j = 0; j < k_dim; ++j)
        if (j != k) num -= b(k, j) * s.loadings(d, j);
      s.loadings(d, k) = num / den;
    }
  }
}

// Sigmoid mean-field update of every feature activation.  Training rows in
// `view` add the margin force sum_y omega_n^y (mu[y_n] - mu[y]); pass null
// for the purely unsupervised update.  Rows are independent, so the sweep
// may be sharded across threads without changing any value.
inline void update_features(IlsvmState& s, const Matrix& x,
                            const MultinomialBound& bound,
                            const TrainView* view, int n_threads = 1) {
  const int n_rows = s.n_rows(), d_dim = s.n_features(), k_dim = s.n_cols();
  const std::vector<double> logits = stick_feature_logits(s.sticks, bound);
  const std::vector<double> col_sq = detail::loading_col_sq(s);
  // Full Gram of the loading columns for the j != k interaction sums.
  Matrix gram(k_dim, k_dim);
  for (int a = 0; a < k_dim; ++a)
    for (int bcol = a; bcol < k_dim; ++bcol) {
      double v = 0.0;
      for (int d = 0; d < d_dim; ++d)
        v += s.loadings(d, a) * s.loadings(d, bcol);
      gram(a, bcol) = gram(bcol, a) = v;
    }
  std::vector<int> train_pos(static_cast<std::size_t>(n_rows), -1);
  if (view)
    for (std::size_t i = 0; i < view->rows.size(); ++i)
      train_pos[static_cast<std::size_t>(view->rows[i])] =
          static_cast<int>(i);

  detail::parallel_for(n_rows, resolve_threads(n_threads), [&](int n) {
    const double inv = 1.0 / s.sigma_n0_sq[static_cast<std::size_t>(n)];
    // x_n' Phi_k once per row.
    std::vector<double> xphi(static_cast<std::size_t>(k_dim), 0.0);
    for (int d = 0; d < d_dim; ++d) {
      const double xv = x(n, d);
      if (xv == 0.0) continue;
      for (int k = 0; k < k_dim; ++k)
        xphi[static_cast<std::size_t>(k)] += xv * s.loadings(d, k);
    }
    // Margin coefficients m_k = sum_y omega_n^y (mu[y_n,k] - mu[y,k]).
    std::vector<double> margin;
    const int pos = view ? train_pos[static_cast<std::size_t>(n)] : -1;
    if (pos >= 0) {
      const int l_dim = view->n_labels;
      const int y_n = view->labels[static_cast<std::size_t>(pos)];
      double mass = 0.0;
      margin.assign(static_cast<std::size_t>(k_dim), 0.0);
      for (int y = 0; y < l_dim; ++y) {
        const double w =
            s.duals[static_cast<std::size_t>(pos) * l_dim + y];
        if (w == 0.0) continue;
        mass += w;
        for (int k = 0; k < k_dim; ++k)
          margin[static_cast<std::size_t>(k)] -= w * s.eta_mean(y, k);
      }
      if (mass != 0.0)
        for (int k = 0; k < k_dim; ++k)
          margin[static_cast<std::size_t>(k)] +=
              mass * s.eta_mean(y_n - 1, k);
    }
    for (int k = 0; k < k_dim; ++k) {
      double cross = 0.0;  // sum_{j != k} psi_nj Phi_j' Phi_k, current row
      for (int j = 0; j < k_dim; ++j) cross += s.psi(n, j) * gram(j, k);
      cross -= s.psi(n, k) * gram(k, k);
      double theta =
          logits[static_cast<std::size_t>(k)] -
          (d_dim * s.sigma_sq[static_cast<std::size_t>(k)] +
           col_sq[static_cast<std::size_t>(k)]) *
              (0.5 * inv) +
          (xphi[static_cast<std::size_t>(k)] - cross) * inv;
      if (!margin.empty() && margin[static_cast<std::size_t>(k)] != 0.0)
        theta += margin[static_cast<std::size_t>(k)];
      s.psi(n, k) = sigmoid(theta);
    }
  });
}

// Fit the classifier posterior mean by solving the multi-way simplex dual on
// the current feature activations; warm-starts from the stored duals.
inline void update_classifier(IlsvmState& s, const TrainView& view, double c,
                              const Matrix& cost, double tol = 1e-6,
                              int max_passes = 1000) {
  const int l_dim = view.n_labels;
  const int k_dim = s.n_cols();
  const std::size_t n_tr = view.rows.size();
  if (n_tr == 0) throw std::invalid_argument("empty training set");
  if (c == 0.0) {
    s.duals.assign(n_tr * static_cast<std::size_t>(l_dim), 0.0);
    s.eta_mean = Matrix(l_dim, k_dim);
    s.kkt_violation = 0.0;
    return;
  }
  MulticlassDualProblem p;
  p.c = c;
  p.cost = Matrix(static_cast<int>(n_tr), l_dim);
  p.delta.resize(n_tr);
  for (std::size_t i = 0; i < n_tr; ++i) {
    const int n = view.rows[i];
    const int y_n = view.labels[i];
    p.delta[i].assign(static_cast<std::size_t>(l_dim),
                      std::vector<double>(
                          static_cast<std::size_t>(l_dim) * k_dim, 0.0));
    for (int y = 1; y <= l_dim; ++y) {
      p.cost(static_cast<int>(i), y - 1) = detail::label_cost(cost, y_n, y);
      if (y == y_n) continue;  // delta of the true label is zero
      auto& d = p.delta[i][static_cast<std::size_t>(y) - 1];
      for (int k = 0; k < k_dim; ++k) {
        d[static_cast<std::size_t>((y_n - 1) * k_dim + k)] = s.psi(n, k);
        d[static_cast<std::size_t>((y - 1) * k_dim + k)] = -s.psi(n, k);
      }
    }
  }
  const bool warm = s.duals.size() == n_tr * static_cast<std::size_t>(l_dim);
  const DualSolution sol =
      solve_multiclass_simplex(p, tol, max_passes, warm ? &s.duals : nullptr);
  s.duals = sol.omega;
  s.kkt_violation = sol.kkt_violation;
  const std::vector<double> mu = classifier_mean(p, sol.omega);
  s.eta_mean = Matrix(l_dim, k_dim);
  for (int y = 0; y < l_dim; ++y)
    for (int k = 0; k < k_dim; ++k)
      s.eta_mean(y, k) = mu[static_cast<std::size_t>(y * k_dim + k)];
}

// Closed-form hyperparameter refresh: prior loading variance from the
// loading posterior, per-example noise from the expected residual.
inline void estimate_hypers(IlsvmState& s, const Matrix& x) {
  const std::vector<double> col_sq = detail::loading_col_sq(s);
  const int d_dim = s.n_features(), k_dim = s.n_cols();
  double acc = 0.0;
  for (int k = 0; k < k_dim; ++k)
    acc += d_dim * s.sigma_sq[static_cast<std::size_t>(k)] +
           col_sq[static_cast<std::size_t>(k)];
  s.sigma0_sq = std::max(acc / (static_cast<double>(k_dim) * d_dim), 1e-8);
  for (int n = 0; n < s.n_rows(); ++n)
    s.sigma_n0_sq[static_cast<std::size_t>(n)] =
        std::max(detail::expected_residual(s, x, n, col_sq) / d_dim, 1e-8);
}

namespace detail {

inline double classifier_kl(const IlsvmState& s) {
  double sq = 0.0;
  for (double v : s.eta_mean.data) sq += v * v;
  return 0.5 * sq;
}

inline double loading_kl(const IlsvmState& s) {
  const std::vector<double> col_sq = loading_col_sq(s);
  const double d_dim = s.n_features();
  double kl = 0.0;
  for (int k = 0; k < s.n_cols(); ++k) {
    const double var = s.sigma_sq[static_cast<std::size_t>(k)];
    kl += (d_dim * var + col_sq[static_cast<std::size_t>(k)]) /
              (2.0 * s.sigma0_sq) -
          0.5 * d_dim * (1.0 + std::log(var / s.sigma0_sq));
  }
  return kl;
}

inline double hinge_term(const IlsvmState& s, const TrainView& view, double c,
                         const Matrix& cost) {
  if (c == 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < view.rows.size(); ++i) {
    const int n = view.rows[i];
    const int y_n = view.labels[i];
    const double f_true = discriminant(s, n, y_n);
    double worst = 0.0;  // y = y_n contributes cost 0 - 0
    for (int y = 1; y <= view.n_labels; ++y) {
      const double gap = label_cost(cost, y_n, y) -
                         (f_true - discriminant(s, n, y));
      if (gap > worst) worst = gap;
    }
    total += worst;
  }
  return c * total;
}

}  // namespace detail

// Upper-bound surrogate objective: stick KL + bounded feature KL + loading
// KL + classifier KL - expected log-likelihood + scaled hinge on train rows.
inline double objective(const IlsvmState& s, const Matrix& x,
                        const TrainView& view, double c, const Matrix& cost) {
  const MultinomialBound bound = multinomial_bound(s.sticks);
  const std::vector<double> col_sq = detail::loading_col_sq(s);
  double obj = kl_sticks(s.sticks) + kl_features(s.psi, s.sticks, bound) +
               detail::loading_kl(s) + detail::classifier_kl(s);
  for (int n = 0; n < s.n_rows(); ++n)
    obj -= detail::loglik_row(s, x, n, col_sq);
  const double hinge = detail::hinge_term(s, view, c, cost);
  if (hinge != 0.0) obj += hinge;
  return obj;
}

// Same bound with the hinge replaced by its dual linearization
// sum_{n,y} omega_n^y (cost - (f(y_n) - f(y))); block-coordinate updates at
// fixed duals never increase this.
inline double lagrangian(const IlsvmState& s, const Matrix& x,
                         const TrainView& view, const Matrix& cost) {
  const MultinomialBound bound = multinomial_bound(s.sticks);
  const std::vector<double> col_sq = detail::loading_col_sq(s);
  double obj = kl_sticks(s.sticks) + kl_features(s.psi, s.sticks, bound) +
               detail::loading_kl(s) + detail::classifier_kl(s);
  for (int n = 0; n < s.n_rows(); ++n)
    obj -= detail::loglik_row(s, x, n, col_sq);
  const int l_dim = view.n_labels;
  for (std::size_t i = 0; i < view.rows.size(); ++i) {
    const int n = view.rows[i];
    const int y_n = view.labels[i];
    const double f_true = discriminant(s, n, y_n);
    for (int y = 1; y <= l_dim; ++y) {
      const double w = s.duals[i * static_cast<std::size_t>(l_dim) + y - 1];
      if (w == 0.0) continue;
      obj += w * (detail::label_cost(cost, y_n, y) -
                  (f_true - discriminant(s, n, y)));
    }
  }
  return obj;
}

namespace detail {

// Leading singular directions of x by power iteration with deflation; used
// only as a loading warm start, so modest precision is fine.
inline void svd_warm_start(IlsvmState& s, const Matrix& x, std::uint64_t seed) {
  const int n_rows = x.rows, d_dim = x.cols;
  const int r = std::min(s.n_cols(), std::min(n_rows, d_dim));
  Matrix work = x;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  for (int k = 0; k < r; ++k) {
    std::vector<double> v(static_cast<std::size_t>(d_dim));
    for (double& vi : v) vi = rng.normal();
    double sv = 0.0;
    for (int it = 0; it < 100; ++it) {
      std::vector<double> u(static_cast<std::size_t>(n_rows), 0.0);
      for (int i = 0; i < n_rows; ++i)
        for (int d = 0; d < d_dim; ++d)
          u[static_cast<std::size_t>(i)] +=
              work(i, d) * v[static_cast<std::size_t>(d)];
      std::vector<double> w(static_cast<std::size_t>(d_dim), 0.0);
      for (int i = 0; i < n_rows; ++i)
        for (int d = 0; d < d_dim; ++d)
          w[static_cast<std::size_t>(d)] +=
              work(i, d) * u[static_cast<std::size_t>(i)];
      double norm = 0.0;
      for (double wi : w) norm += wi * wi;
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      for (double& wi : w) wi /= norm;
      double diff = 0.0;
      for (std::size_t d = 0; d < w.size(); ++d)
        diff = std::max(diff, std::fabs(w[d] - v[d]));
      v = w;
      double uv = 0.0;
      for (int i = 0; i < n_rows; ++i) {
        double dot = 0.0;
        for (int d = 0; d < d_dim; ++d)
          dot += work(i, d) * v[static_cast<std::size_t>(d)];
        uv += dot * dot;
      }
      sv = std::sqrt(uv);
      if (diff < 1e-10) break;
    }
    const double scale = sv / std::sqrt(static_cast<double>(n_rows));
    std::vector<double> u(static_cast<std::size_t>(n_rows), 0.0);
    for (int i = 0; i < n_rows; ++i)
      for (int d = 0; d < d_dim; ++d)
        u[static_cast<std::size_t>(i)] +=
            work(i, d) * v[static_cast<std::size_t>(d)];
    if (sv > 0.0)
      for (double& ui : u) ui /= sv;
    for (int d = 0; d < d_dim; ++d) {
      s.loadings(d, k) = scale * v[static_cast<std::size_t>(d)];
      for (int i = 0; i < n_rows; ++i)
        work(i, d) -= sv * u[static_cast<std::size_t>(i)] *
                      v[static_cast<std::size_t>(d)];
    }
  }
}

}  // namespace detail

inline IlsvmState init_ilsvm(const Matrix& x, int n_labels,
                             const IlsvmConfig& cfg, std::size_t n_train) {
  IlsvmState s;
  s.sticks = StickPosterior(cfg.truncation, cfg.alpha);
  s.psi = Matrix(x.rows, cfg.truncation);
  Rng rng(cfg.seed);
  for (double& p : s.psi.data) p = 0.5 + rng.normal(0.0, 0.001);
  s.loadings = Matrix(x.cols, cfg.truncation);
  if (cfg.svd_init) detail::svd_warm_start(s, x, cfg.seed);
  s.sigma_sq.assign(static_cast<std::size_t>(cfg.truncation), 1.0);
  s.eta_mean = Matrix(n_labels, cfg.truncation);
  s.duals.assign(n_train * static_cast<std::size_t>(n_labels), 0.0);
  s.sigma0_sq = 1.0;
  s.sigma_n0_sq.resize(static_cast<std::size_t>(x.rows));
  for (int n = 0; n < x.rows; ++n) {
    double mean = 0.0;
    for (int d = 0; d < x.cols; ++d) mean += x(n, d);
    mean /= x.cols;
    double var = 0.0;
    for (int d = 0; d < x.cols; ++d)
      var += (x(n, d) - mean) * (x(n, d) - mean);
    s.sigma_n0_sq[static_cast<std::size_t>(n)] =
        std::max(var / x.cols, 1e-6);
  }
  return s;
}

// Nested variational loop: inner coordinate sweeps to tolerance, then one
// dual solve (plus optional hyperparameter refresh) per outer pass.
inline IlsvmState fit_ilsvm(const Dataset& ds, const IlsvmConfig& cfg,
                            const FitHooks* hooks = nullptr) {
  cfg.validate();
  if (ds.train_idx.empty()) throw std::invalid_argument("empty training set");
  if (ds.n_features < 1) throw std::invalid_argument("no features");
  if (!cfg.cost.empty() &&
      (cfg.cost.rows != ds.n_labels || cfg.cost.cols != ds.n_labels))
    throw std::invalid_argument("cost matrix must be L x L");
  const TrainView view = train_view(ds);
  for (std::size_t i = 0; i < view.rows.size(); ++i)
    if (view.labels[i] < 1 || view.labels[i] > ds.n_labels)
      throw std::invalid_argument("train label out of 1..L");
  const Matrix x = dense_matrix(ds.rows, ds.n_features);
  for (double v : x.data)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature");

  bool degenerate = ds.n_labels < 2;
  if (!degenerate) {
    degenerate = true;
    for (int lab : view.labels) degenerate = degenerate && lab == view.labels[0];
  }
  if (degenerate)
    std::cerr << "warning: training labels are all identical; classifier "
                 "mean stays zero\n";

  IlsvmState s = init_ilsvm(x, ds.n_labels, cfg, view.rows.size());
  const int threads = resolve_threads(cfg.n_threads);
  const auto step = [&](const char* stage) {
    if (hooks && hooks->on_step) hooks->on_step(stage, s);
  };
  const auto rel_change = [](double cur, double prev) {
    return std::fabs(cur - prev) / std::max(1.0, std::fabs(prev));
  };

  double outer_prev = objective(s, x, view, cfg.c, cfg.cost);
  s.trace.push_back(outer_prev);
  for (int outer = 0; outer < cfg.outer_iters; ++outer) {
    double inner_prev = outer_prev;
    for (int it = 0; it < cfg.inner_iters; ++it) {
      MultinomialBound bound = multinomial_bound(s.sticks);
      s.sticks = update_sticks(s.sticks, s.psi, bound);
      step("sticks");
      bound = multinomial_bound(s.sticks);
      update_loadings(s, x);
      step("loadings");
      update_features(s, x, bound, &view, threads);
      step("features");
      const double cur = objective(s, x, view, cfg.c, cfg.cost);
      const bool done = rel_change(cur, inner_prev) < cfg.inner_tol;
      inner_prev = cur;
      if (done) break;
    }
    if (!degenerate && cfg.c != 0.0) {
      update_classifier(s, view, cfg.c, cfg.cost, cfg.svm_tol,
                        cfg.svm_max_passes);
      step("dual");
    }
    if (cfg.estimate_hypers) {
      estimate_hypers(s, x);
      step("hypers");
    }
    const double cur = objective(s, x, view, cfg.c, cfg.cost);
    s.trace.push_back(cur);
    const bool done = rel_change(cur, outer_prev) < cfg.outer_tol;
    outer_prev = cur;
    if (done) break;
  }
  return s;
}

// Two-stage baseline: unsupervised fit (margin forces off), then a single
// dual solve on the frozen feature activations.  The classifier sees the
// factor-analysis representation but never shapes it.
inline IlsvmState decoupled_ilsvm(const Dataset& ds, IlsvmConfig cfg,
                                  const FitHooks* hooks = nullptr) {
  const double margin_c = cfg.c;
  cfg.c = 0.0;
  IlsvmState s = fit_ilsvm(ds, cfg, hooks);
  if (margin_c != 0.0) {
    const TrainView view = train_view(ds);
    bool degenerate = ds.n_labels < 2;
    if (!degenerate) {
      degenerate = true;
      for (int lab : view.labels)
        degenerate = degenerate && lab == view.labels[0];
    }
    if (!degenerate)
      update_classifier(s, view, margin_c, cfg.cost, cfg.svm_tol,
                        cfg.svm_max_passes);
  }
  return s;
}

}  // namespace regbayes
