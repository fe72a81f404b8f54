// Independent reference oracles used by the test suite: brute-force grid
// suprema, Monte-Carlo estimators, quadrature, and naive re-implementations.
// These deliberately avoid the library's own code paths.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Brute-force conjugate suprema: sup_x <mu, x> - g(x) over a regular grid.
// ---------------------------------------------------------------------------

inline double grid_sup_1d(const std::function<double(double)>& loss, double mu,
                          double radius, double step) {
  double best = -1e300;
  const long n = std::lround(2.0 * radius / step);
  for (long i = 0; i <= n; ++i) {
    const double x = -radius + step * static_cast<double>(i);
    const double v = mu * x - loss(x);
    if (v > best) best = v;
  }
  return best;
}

inline double grid_sup_2d(
    const std::function<double(const std::vector<double>&)>& loss,
    const std::vector<double>& mu, double radius, double step) {
  double best = -1e300;
  const long n = std::lround(2.0 * radius / step);
  std::vector<double> x(2);
  for (long i = 0; i <= n; ++i) {
    x[0] = -radius + step * static_cast<double>(i);
    for (long j = 0; j <= n; ++j) {
      x[1] = -radius + step * static_cast<double>(j);
      const double v = mu[0] * x[0] + mu[1] * x[1] - loss(x);
      if (v > best) best = v;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimators over Beta draws (statistical comparisons only, so
// std:: distributions are fine here).
// ---------------------------------------------------------------------------

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline double beta_draw(std::mt19937_64& gen, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(gen);
  const double y = gb(gen);
  return x / (x + y);
}

// E[log nu] for nu ~ Beta(a, b).
inline MeanStderr mc_expected_log_beta(double a, double b, int n_draws,
                                       std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n_draws; ++i) {
    const double v = std::log(beta_draw(gen, a, b));
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n_draws;
  const double var = std::max(0.0, sumsq / n_draws - mean * mean);
  return {mean, std::sqrt(var / n_draws)};
}

// E[log(1 - prod_{j<=k} nu_j)] for independent nu_j ~ Beta(g1[j], g2[j]),
// estimated jointly for every prefix k.  Products are clamped away from 1
// so the logarithm stays finite; at these parameter ranges the clamp is
// hit with negligible probability.
inline std::vector<MeanStderr> mc_log_one_minus_stick_prefix(
    const std::vector<double>& g1, const std::vector<double>& g2, int n_draws,
    std::uint64_t seed) {
  const int k_max = static_cast<int>(g1.size());
  std::mt19937_64 gen(seed);
  std::vector<double> sum(k_max, 0.0), sumsq(k_max, 0.0);
  for (int i = 0; i < n_draws; ++i) {
    double prod = 1.0;
    for (int k = 0; k < k_max; ++k) {
      prod *= beta_draw(gen, g1[k], g2[k]);
      const double v = std::log(1.0 - std::min(prod, 1.0 - 1e-15));
      sum[k] += v;
      sumsq[k] += v * v;
    }
  }
  std::vector<MeanStderr> out(k_max);
  for (int k = 0; k < k_max; ++k) {
    const double mean = sum[k] / n_draws;
    const double var = std::max(0.0, sumsq[k] / n_draws - mean * mean);
    out[k] = {mean, std::sqrt(var / n_draws)};
  }
  return out;
}

// ---------------------------------------------------------------------------
// KL( Beta(a1,a2) || Beta(b1,b2) ) by composite Simpson quadrature on the
// open interval, with an interior grid to sidestep the endpoint
// singularities (integrand decays there for the parameters under test).
// ---------------------------------------------------------------------------

inline double quadrature_beta_kl(double a1, double a2, double b1, double b2) {
  auto log_beta_fn = [](double p, double q) {
    return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
  };
  auto log_q = [&](double x) {
    return (a1 - 1.0) * std::log(x) + (a2 - 1.0) * std::log1p(-x) -
           log_beta_fn(a1, a2);
  };
  auto log_p = [&](double x) {
    return (b1 - 1.0) * std::log(x) + (b2 - 1.0) * std::log1p(-x) -
           log_beta_fn(b1, b2);
  };
  auto f = [&](double x) {
    return std::exp(log_q(x)) * (log_q(x) - log_p(x));
  };
  const double lo = 1e-9, hi = 1.0 - 1e-9;
  const int n = 2'000'000;  // even
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i)
    acc += f(lo + h * i) * ((i % 2 == 1) ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// ---------------------------------------------------------------------------
// Finite-difference digamma from lgamma with Richardson extrapolation.
// ---------------------------------------------------------------------------

inline double fd_digamma(double x, double h = 1e-5) {
  auto central = [&](double step) {
    return (std::lgamma(x + step) - std::lgamma(x - step)) / (2.0 * step);
  };
  const double d1 = central(h);
  const double d2 = central(h / 2.0);
  return (4.0 * d2 - d1) / 3.0;
}

// ---------------------------------------------------------------------------
// Exhaustive search over the scaled probability simplex (grid resolution
// `step`), for small multiclass dual instances.
// ---------------------------------------------------------------------------

// Enumerates nonnegative L-vectors summing to total on a grid of spacing
// `step` and calls fn on each.
inline void for_each_simplex_point(
    int dims, double total, double step,
    const std::function<void(const std::vector<double>&)>& fn) {
  const int ticks = static_cast<int>(std::lround(total / step));
  std::vector<int> counts(dims, 0);
  std::vector<double> point(dims, 0.0);
  std::function<void(int, int)> rec = [&](int d, int remaining) {
    if (d == dims - 1) {
      counts[d] = remaining;
      for (int i = 0; i < dims; ++i) point[i] = counts[i] * step;
      fn(point);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[d] = c;
      rec(d + 1, remaining - c);
    }
  };
  if (ticks == 0) {
    fn(std::vector<double>(dims, 0.0));
    return;
  }
  rec(0, ticks);
}

// ---------------------------------------------------------------------------
// Perceptron separability oracles (with a bias input appended).
// ---------------------------------------------------------------------------

// Multiclass perceptron; labels in 1..L.  Returns true if some epoch makes
// zero mistakes (argmax prediction, lowest index on ties).
inline bool multiclass_perceptron_separates(
    const std::vector<std::vector<double>>& x, const std::vector<int>& y,
    int n_labels, int max_epochs = 2000) {
  if (x.empty()) return true;
  const int dim = static_cast<int>(x[0].size()) + 1;  // + bias
  std::vector<std::vector<double>> w(n_labels, std::vector<double>(dim, 0.0));
  auto score = [&](int label, const std::vector<double>& xi) {
    double s = w[label - 1][dim - 1];
    for (int j = 0; j + 1 < dim; ++j) s += w[label - 1][j] * xi[j];
    return s;
  };
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    int mistakes = 0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      int best = 1;
      double best_s = score(1, x[n]);
      for (int l = 2; l <= n_labels; ++l) {
        const double s = score(l, x[n]);
        if (s > best_s) {
          best_s = s;
          best = l;
        }
      }
      if (best != y[n]) {
        ++mistakes;
        for (int j = 0; j + 1 < dim; ++j) {
          w[y[n] - 1][j] += x[n][j];
          w[best - 1][j] -= x[n][j];
        }
        w[y[n] - 1][dim - 1] += 1.0;
        w[best - 1][dim - 1] -= 1.0;
      }
    }
    if (mistakes == 0) return true;
  }
  return false;
}

// Binary perceptron; labels in {-1,+1}, zero score predicts +1.
inline bool binary_perceptron_separates(
    const std::vector<std::vector<double>>& x, const std::vector<int>& y,
    int max_epochs = 2000) {
  if (x.empty()) return true;
  const int dim = static_cast<int>(x[0].size()) + 1;
  std::vector<double> w(dim, 0.0);
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    int mistakes = 0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      double s = w[dim - 1];
      for (int j = 0; j + 1 < dim; ++j) s += w[j] * x[n][j];
      const int pred = s >= 0.0 ? 1 : -1;
      if (pred != y[n]) {
        ++mistakes;
        for (int j = 0; j + 1 < dim; ++j) w[j] += y[n] * x[n][j];
        w[dim - 1] += y[n];
      }
    }
    if (mistakes == 0) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Spearman rank correlation (average ranks on ties).
// ---------------------------------------------------------------------------

inline std::vector<double> ranks(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> r(n, 0.0);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (int t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman_rho(const std::vector<double>& a,
                           const std::vector<double>& b) {
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  const int n = static_cast<int>(a.size());
  double ma = 0.0, mb = 0.0;
  for (int i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, va = 0.0, vb = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return num / std::sqrt(va * vb);
}

}  // namespace oracle
