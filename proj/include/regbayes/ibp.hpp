// Truncated stick-breaking Indian Buffet Process variational state:
// Beta stick posteriors, the multinomial lower bound on E[log(1 - prod nu)],
// closed-form stick updates, KL terms, and a prior sampler.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "regbayes/dense.hpp"
#include "regbayes/rng.hpp"
#include "regbayes/special.hpp"

namespace regbayes {

// Beta(gamma1_k, gamma2_k) posteriors over the stick fractions nu_k,
// truncated at K sticks, under the prior nu_k ~ Beta(alpha, 1).
struct StickPosterior {
  std::vector<double> gamma1;
  std::vector<double> gamma2;
  double alpha = 1.0;

  StickPosterior() = default;
  StickPosterior(int truncation, double a)
      : gamma1(truncation, a), gamma2(truncation, 1.0), alpha(a) {
    if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");
    if (!(a > 0.0)) throw std::invalid_argument("alpha must be positive");
  }

  int truncation() const { return static_cast<int>(gamma1.size()); }

  void validate() const {
    if (gamma1.empty() || gamma1.size() != gamma2.size())
      throw std::invalid_argument("stick posterior shape mismatch");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    for (std::size_t k = 0; k < gamma1.size(); ++k)
      if (!(gamma1[k] > 0.0) || !(gamma2[k] > 0.0))
        throw std::invalid_argument("gamma entries must be strictly positive");
  }
};

// Auxiliary multinomial weights q_{k,0..k} and the induced lower bounds
// lnu[k] <= E[log(1 - prod_{j<=k} nu_j)].  q is stored K x K with zeros
// above the diagonal.
struct MultinomialBound {
  Matrix q;
  std::vector<double> lnu;
};

// E[log nu_k] = digamma(gamma1_k) - digamma(gamma1_k + gamma2_k); 0-based k.
inline double expected_log_nu(const StickPosterior& sp, int k) {
  if (k < 0 || k >= sp.truncation())
    throw std::out_of_range("stick index out of range");
  return digamma(sp.gamma1[k]) - digamma(sp.gamma1[k] + sp.gamma2[k]);
}

inline std::vector<double> expected_log_nu_all(const StickPosterior& sp) {
  std::vector<double> out(sp.truncation());
  for (int k = 0; k < sp.truncation(); ++k) out[k] = expected_log_nu(sp, k);
  return out;
}

// Tightest multinomial bound: weights
//   q_{km} proportional to exp( digamma(g2_m) + sum_{n<m} digamma(g1_n)
//                               - sum_{n<=m} digamma(g1_n + g2_n) ),
// normalized over m <= k, and
//   lnu[k] = sum_{m<=k} q_{km} digamma(g2_m)
//          + sum_{m<k} (sum_{n=m+1..k} q_{kn}) digamma(g1_m)
//          - sum_{m<=k} (sum_{n=m..k} q_{kn}) digamma(g1_m + g2_m)
//          + H(q_{k.}).
inline MultinomialBound multinomial_bound(const StickPosterior& sp) {
  sp.validate();
  const int K = sp.truncation();
  std::vector<double> d1(K), d2(K), d12(K);
  for (int k = 0; k < K; ++k) {
    d1[k] = digamma(sp.gamma1[k]);
    d2[k] = digamma(sp.gamma2[k]);
    d12[k] = digamma(sp.gamma1[k] + sp.gamma2[k]);
  }
  // Unnormalized log-weights are shared across rows.
  std::vector<double> logw(K);
  double acc1 = 0.0, acc12 = 0.0;
  for (int m = 0; m < K; ++m) {
    acc12 += d12[m];
    logw[m] = d2[m] + acc1 - acc12;
    acc1 += d1[m];
  }
  MultinomialBound b;
  b.q = Matrix(K, K, 0.0);
  b.lnu.assign(K, 0.0);
  for (int k = 0; k < K; ++k) {
    double mx = logw[0];
    for (int m = 1; m <= k; ++m) mx = std::max(mx, logw[m]);
    double z = 0.0;
    for (int m = 0; m <= k; ++m) {
      b.q(k, m) = std::exp(logw[m] - mx);
      z += b.q(k, m);
    }
    for (int m = 0; m <= k; ++m) b.q(k, m) /= z;
    // Suffix sums s_m = sum_{n=m..k} q_{kn}.
    std::vector<double> suffix(k + 2, 0.0);
    for (int m = k; m >= 0; --m) suffix[m] = suffix[m + 1] + b.q(k, m);
    double val = 0.0;
    for (int m = 0; m <= k; ++m) {
      val += b.q(k, m) * d2[m];
      if (m < k) val += suffix[m + 1] * d1[m];
      val -= suffix[m] * d12[m];
      val -= xlogx(b.q(k, m));  // entropy
    }
    b.lnu[k] = val;
  }
  return b;
}

// Per-column logits of the stick prior on feature activations:
//   a_k = sum_{j<=k} E[log nu_j] - lnu[k].
inline std::vector<double> stick_feature_logits(const StickPosterior& sp,
                                                const MultinomialBound& b) {
  const int K = sp.truncation();
  std::vector<double> a(K);
  double prefix = 0.0;
  for (int k = 0; k < K; ++k) {
    prefix += expected_log_nu(sp, k);
    a[k] = prefix - b.lnu[k];
  }
  return a;
}

// Closed-form coordinate update of the stick posterior given feature means
// psi (R x K) and the current bound weights:
//   gamma1_k = alpha + sum_{m>=k} sum_r psi_{rm}
//                    + sum_{m>k} (R - sum_r psi_{rm}) sum_{i=k+1..m} q_{mi}
//   gamma2_k = 1 + sum_{m>=k} (R - sum_r psi_{rm}) q_{mk}.
inline StickPosterior update_sticks(const StickPosterior& sp,
                                    const Matrix& psi,
                                    const MultinomialBound& b) {
  const int K = sp.truncation();
  if (psi.cols != K) throw std::invalid_argument("psi columns != truncation");
  const int R = psi.rows;
  std::vector<double> colsum(K, 0.0);
  for (int r = 0; r < R; ++r)
    for (int k = 0; k < K; ++k) colsum[k] += psi(r, k);

  StickPosterior out = sp;
  for (int k = 0; k < K; ++k) {
    double g1 = sp.alpha;
    for (int m = k; m < K; ++m) g1 += colsum[m];
    for (int m = k + 1; m < K; ++m) {
      double qtail = 0.0;
      for (int i = k + 1; i <= m; ++i) qtail += b.q(m, i);
      g1 += (R - colsum[m]) * qtail;
    }
    double g2 = 1.0;
    for (int m = k; m < K; ++m) g2 += (R - colsum[m]) * b.q(m, k);
    out.gamma1[k] = g1;
    out.gamma2[k] = g2;
  }
  return out;
}

// KL( q(nu) || prior Beta(alpha,1)^K ), exact:
//   sum_k [ (g1-alpha)(digamma(g1)-digamma(g1+g2))
//         + (g2-1)(digamma(g2)-digamma(g1+g2)) - log B(g1,g2) ] - K log alpha.
inline double kl_sticks(const StickPosterior& sp) {
  sp.validate();
  double kl = 0.0;
  for (int k = 0; k < sp.truncation(); ++k) {
    const double g1 = sp.gamma1[k], g2 = sp.gamma2[k];
    const double d12 = digamma(g1 + g2);
    kl += (g1 - sp.alpha) * (digamma(g1) - d12) +
          (g2 - 1.0) * (digamma(g2) - d12) - log_beta(g1, g2);
  }
  return kl - sp.truncation() * std::log(sp.alpha);
}

// Upper bound on E_q(nu)[ KL( q(Z) || p(Z|nu) ) ] for Bernoulli(psi) features,
// with E[log(1 - prod nu)] replaced by its lower bound lnu:
//   sum_{r,k} [ -psi*prefix_k - (1-psi)*lnu_k
//             + psi log psi + (1-psi) log(1-psi) ].
inline double kl_features(const Matrix& psi, const StickPosterior& sp,
                          const MultinomialBound& b) {
  const int K = sp.truncation();
  if (psi.cols != K) throw std::invalid_argument("psi columns != truncation");
  std::vector<double> prefix(K);
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    acc += expected_log_nu(sp, k);
    prefix[k] = acc;
  }
  double kl = 0.0;
  for (int r = 0; r < psi.rows; ++r) {
    for (int k = 0; k < K; ++k) {
      const double p = std::clamp(psi(r, k), 1e-12, 1.0 - 1e-12);
      kl += -p * prefix[k] - (1.0 - p) * b.lnu[k] + xlogx(p) +
            xlogx(1.0 - p);
    }
  }
  return kl;
}

// One row's stick products pi_k = prod_{i<=k} nu_i with nu_i ~ Beta(alpha,1),
// truncated adaptively where pi drops below 1e-8 (or at max_cols when > 0).
inline std::vector<double> sample_stick_products(double alpha, Rng& rng,
                                                 int max_cols = 0) {
  std::vector<double> pi;
  double p = 1.0;
  while (true) {
    if (max_cols > 0 && static_cast<int>(pi.size()) >= max_cols) break;
    p *= rng.beta_a1(alpha);
    if (p < 1e-8) break;
    pi.push_back(p);
  }
  return pi;
}

// IBP prior sample: each row draws its own stick sequence, so row feature
// counts are independent Poisson(alpha) draws.  Returns an N x K 0/1 matrix
// with K the widest row.
inline Matrix sample_ibp(double alpha, int n_rows, Rng& rng,
                         int max_cols = 0) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (n_rows < 1) throw std::invalid_argument("need at least one row");
  std::vector<std::vector<char>> rows(n_rows);
  int width = 0;
  for (int r = 0; r < n_rows; ++r) {
    const std::vector<double> pi = sample_stick_products(alpha, rng, max_cols);
    rows[r].resize(pi.size());
    for (std::size_t k = 0; k < pi.size(); ++k)
      rows[r][k] = rng.bernoulli(pi[k]) ? 1 : 0;
    width = std::max(width, static_cast<int>(pi.size()));
  }
  Matrix z(n_rows, std::max(width, 1), 0.0);
  for (int r = 0; r < n_rows; ++r)
    for (std::size_t k = 0; k < rows[r].size(); ++k)
      z(r, static_cast<int>(k)) = rows[r][k];
  return z;
}

}  // namespace regbayes
