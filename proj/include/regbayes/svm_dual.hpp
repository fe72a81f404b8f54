// Dual quadratic-program solvers for the embedded large-margin subproblems:
// box-constrained binary duals (coordinate ascent with shrinking) and
// simplex-constrained multiclass duals (block projected gradient).
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "regbayes/dense.hpp"

namespace regbayes {

// maximize  -1/2 ||mu||^2 + sum_n omega_n,   mu = sum_n y_n omega_n v_n,
// subject to 0 <= omega_n <= C.
struct BinaryDualProblem {
  std::vector<std::vector<double>> v;  // per-example feature vectors
  std::vector<int> y;                  // labels in {-1,+1}
  double c = 1.0;
};

// maximize  -1/2 ||mu||^2 + sum_{n,y} omega_n^y cost(n,y),
//           mu = sum_{n,y} omega_n^y delta[n][y],
// subject to omega_n^y >= 0 and sum_y omega_n^y = C for every n.
//
// An unweighted linear term sum_{n,y} omega_n^y would be pinned to the
// constant N*C by the simplex constraints; the cost-weighted form is what
// the margin-scaled derivation yields, and with 0/1 costs it scores 0 at
// the all-mass-on-true-label vertex.
struct MulticlassDualProblem {
  std::vector<std::vector<std::vector<double>>> delta;  // [n][y] -> R^P
  Matrix cost;                                          // n_examples x L
  double c = 1.0;
};

struct DualSolution {
  std::vector<double> omega;   // per constraint; multiclass flattens n*L + y
  double kkt_violation = 0.0;  // max stationarity residual at return
  int iterations = 0;          // solver passes consumed
};

namespace detail {

inline void check_finite(const std::vector<double>& v, const char* msg) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument(msg);
}

inline void validate(const BinaryDualProblem& p) {
  if (p.v.empty()) throw std::invalid_argument("binary dual: no examples");
  if (p.v.size() != p.y.size())
    throw std::invalid_argument("binary dual: feature/label count mismatch");
  if (p.c < 0.0) throw std::invalid_argument("binary dual: negative C");
  const std::size_t dim = p.v[0].size();
  for (const auto& vn : p.v) {
    if (vn.size() != dim)
      throw std::invalid_argument("binary dual: ragged feature vectors");
    check_finite(vn, "binary dual: non-finite features");
  }
  for (int yn : p.y)
    if (yn != 1 && yn != -1)
      throw std::invalid_argument("binary dual: labels must be +-1");
}

inline void validate(const MulticlassDualProblem& p) {
  if (p.delta.empty())
    throw std::invalid_argument("multiclass dual: no examples");
  const int n_labels = p.cost.cols;
  if (n_labels < 2) throw std::invalid_argument("multiclass dual: L < 2");
  if (p.cost.rows != static_cast<int>(p.delta.size()))
    throw std::invalid_argument("multiclass dual: cost/delta shape mismatch");
  if (p.c < 0.0) throw std::invalid_argument("multiclass dual: negative C");
  std::size_t dim = std::numeric_limits<std::size_t>::max();
  for (const auto& block : p.delta) {
    if (static_cast<int>(block.size()) != n_labels)
      throw std::invalid_argument("multiclass dual: block size != L");
    for (const auto& d : block) {
      if (dim == std::numeric_limits<std::size_t>::max()) dim = d.size();
      if (d.size() != dim)
        throw std::invalid_argument("multiclass dual: ragged delta vectors");
      check_finite(d, "multiclass dual: non-finite features");
    }
  }
  for (double cst : p.cost.data)
    if (!(cst >= 0.0))
      throw std::invalid_argument("multiclass dual: negative cost");
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Euclidean projection onto { x >= 0, sum x = total } by the sort-and-shift
// threshold rule.
inline void project_simplex(std::vector<double>& x, double total) {
  const int n = static_cast<int>(x.size());
  std::vector<double> u = x;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  for (int j = 0; j < n; ++j) {
    css += u[j];
    const double t = (css - total) / (j + 1);
    if (u[j] - t > 0.0)
      theta = t;
    else
      break;
  }
  for (double& xi : x) xi = std::max(xi - theta, 0.0);
}

}  // namespace detail

inline std::vector<double> classifier_mean(const BinaryDualProblem& p,
                                           const std::vector<double>& omega) {
  std::vector<double> mu(p.v[0].size(), 0.0);
  for (std::size_t n = 0; n < p.v.size(); ++n)
    for (std::size_t j = 0; j < mu.size(); ++j)
      mu[j] += p.y[n] * omega[n] * p.v[n][j];
  return mu;
}

inline double dual_objective(const BinaryDualProblem& p,
                             const std::vector<double>& omega) {
  const std::vector<double> mu = classifier_mean(p, omega);
  double obj = -0.5 * detail::dot(mu, mu);
  for (double w : omega) obj += w;
  return obj;
}

inline std::vector<double> classifier_mean(const MulticlassDualProblem& p,
                                           const std::vector<double>& omega) {
  const int n_labels = p.cost.cols;
  std::vector<double> mu(p.delta[0][0].size(), 0.0);
  for (std::size_t n = 0; n < p.delta.size(); ++n)
    for (int y = 0; y < n_labels; ++y) {
      const double w = omega[n * n_labels + y];
      if (w == 0.0) continue;
      const auto& d = p.delta[n][y];
      for (std::size_t j = 0; j < mu.size(); ++j) mu[j] += w * d[j];
    }
  return mu;
}

inline double dual_objective(const MulticlassDualProblem& p,
                             const std::vector<double>& omega) {
  const std::vector<double> mu = classifier_mean(p, omega);
  double obj = -0.5 * detail::dot(mu, mu);
  const int n_labels = p.cost.cols;
  for (std::size_t n = 0; n < p.delta.size(); ++n)
    for (int y = 0; y < n_labels; ++y)
      obj += omega[n * n_labels + y] * p.cost(static_cast<int>(n), y);
  return obj;
}

// Max stationarity/complementary-slackness residual of a feasible box dual:
// with G_n = y_n <mu, v_n> - 1, the residual at omega_n is max(-G, 0) at the
// lower bound, max(G, 0) at the upper bound, and |G| in the interior.
inline double kkt_residual(const BinaryDualProblem& p,
                           const std::vector<double>& omega) {
  detail::validate(p);
  if (omega.size() != p.v.size())
    throw std::invalid_argument("kkt_residual: omega size mismatch");
  for (double w : omega)
    if (!(w >= 0.0 && w <= p.c))
      throw std::invalid_argument("kkt_residual: omega outside the box");
  const std::vector<double> mu = classifier_mean(p, omega);
  double worst = 0.0;
  for (std::size_t n = 0; n < p.v.size(); ++n) {
    const double g = p.y[n] * detail::dot(mu, p.v[n]) - 1.0;
    double pg;
    if (omega[n] <= 0.0)
      pg = std::min(g, 0.0);
    else if (omega[n] >= p.c)
      pg = std::max(g, 0.0);
    else
      pg = g;
    worst = std::max(worst, std::abs(pg));
  }
  return worst;
}

// Max over blocks of (max_y d_y - min_{y in support} d_y) with ascent
// direction d_y = cost(n,y) - <mu, delta[n][y]>; zero at a simplex optimum.
inline double kkt_residual(const MulticlassDualProblem& p,
                           const std::vector<double>& omega) {
  detail::validate(p);
  const int n_labels = p.cost.cols;
  if (omega.size() != p.delta.size() * n_labels)
    throw std::invalid_argument("kkt_residual: omega size mismatch");
  for (std::size_t n = 0; n < p.delta.size(); ++n) {
    double sum = 0.0;
    for (int y = 0; y < n_labels; ++y) {
      const double w = omega[n * n_labels + y];
      if (!(w >= 0.0))
        throw std::invalid_argument("kkt_residual: negative omega");
      sum += w;
    }
    if (std::abs(sum - p.c) > 1e-9 * std::max(1.0, p.c))
      throw std::invalid_argument("kkt_residual: omega off the simplex");
  }
  if (p.c == 0.0) return 0.0;
  const std::vector<double> mu = classifier_mean(p, omega);
  double worst = 0.0;
  for (std::size_t n = 0; n < p.delta.size(); ++n) {
    double dmax = -std::numeric_limits<double>::infinity();
    double dsupp = std::numeric_limits<double>::infinity();
    for (int y = 0; y < n_labels; ++y) {
      const double d = p.cost(static_cast<int>(n), y) -
                       detail::dot(mu, p.delta[n][y]);
      dmax = std::max(dmax, d);
      if (omega[n * n_labels + y] > 0.0) dsupp = std::min(dsupp, d);
    }
    worst = std::max(worst, dmax - dsupp);
  }
  return worst;
}

// Dual coordinate ascent over the box, visiting coordinates in index order
// with the usual projected-gradient shrinking heuristic; the dual has no
// bias term, so single-coordinate updates are exact 1-D optima.
inline DualSolution solve_binary_box(const BinaryDualProblem& p,
                                     double tol = 1e-6, int max_passes = 1000,
                                     const std::vector<double>* warm = nullptr) {
  detail::validate(p);
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const int n = static_cast<int>(p.v.size());
  DualSolution sol;
  sol.omega.assign(n, 0.0);
  if (warm) {
    if (warm->size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("warm start size mismatch");
    for (int i = 0; i < n; ++i)
      sol.omega[i] = std::clamp((*warm)[i], 0.0, p.c);
  }
  if (p.c == 0.0) return sol;  // box collapses to the origin

  std::vector<double> qdiag(n);
  for (int i = 0; i < n; ++i) qdiag[i] = detail::dot(p.v[i], p.v[i]);
  std::vector<double> mu(p.v[0].size(), 0.0);
  for (int i = 0; i < n; ++i) {
    // Zero feature vectors never bind their constraint; the dual is linear
    // in their omega with slope +1, so they sit at the upper bound.
    if (qdiag[i] == 0.0) sol.omega[i] = p.c;
    if (sol.omega[i] != 0.0)
      for (std::size_t j = 0; j < mu.size(); ++j)
        mu[j] += p.y[i] * sol.omega[i] * p.v[i][j];
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<char> active(n, 1);
  double pgmax_old = inf, pgmin_old = -inf;
  for (int pass = 1; pass <= max_passes; ++pass) {
    sol.iterations = pass;
    double pgmax = -inf, pgmin = inf;
    for (int i = 0; i < n; ++i) {
      if (!active[i] || qdiag[i] == 0.0) continue;
      const double g = p.y[i] * detail::dot(mu, p.v[i]) - 1.0;
      double pg = g;
      if (sol.omega[i] == 0.0) {
        if (g > pgmax_old) {
          active[i] = 0;
          continue;
        }
        pg = std::min(g, 0.0);
      } else if (sol.omega[i] == p.c) {
        if (g < pgmin_old) {
          active[i] = 0;
          continue;
        }
        pg = std::max(g, 0.0);
      }
      pgmax = std::max(pgmax, pg);
      pgmin = std::min(pgmin, pg);
      if (std::abs(pg) > 1e-14) {
        const double prev = sol.omega[i];
        sol.omega[i] = std::clamp(prev - g / qdiag[i], 0.0, p.c);
        const double step = p.y[i] * (sol.omega[i] - prev);
        if (step != 0.0)
          for (std::size_t j = 0; j < mu.size(); ++j)
            mu[j] += step * p.v[i][j];
      }
    }
    if (pgmax - pgmin <= tol || pgmax == -inf) {
      // Converged on the active subset; confirm against the full set.
      bool all_active = true;
      for (int i = 0; i < n; ++i)
        if (!active[i]) {
          all_active = false;
          break;
        }
      if (all_active) break;
      std::fill(active.begin(), active.end(), 1);
      pgmax_old = inf;
      pgmin_old = -inf;
      continue;
    }
    pgmax_old = pgmax > 0.0 ? pgmax : inf;
    pgmin_old = pgmin < 0.0 ? pgmin : -inf;
  }
  sol.kkt_violation = kkt_residual(p, sol.omega);
  return sol;
}

// Cyclic block coordinate ascent over examples; each size-L block is driven
// to its simplex optimum by projected gradient with a Lipschitz step from
// the block Gram matrix.
inline DualSolution solve_multiclass_simplex(
    const MulticlassDualProblem& p, double tol = 1e-6, int max_passes = 1000,
    const std::vector<double>* warm = nullptr) {
  detail::validate(p);
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const int n_ex = static_cast<int>(p.delta.size());
  const int n_labels = p.cost.cols;
  const std::size_t dim = p.delta[0][0].size();

  DualSolution sol;
  sol.omega.assign(static_cast<std::size_t>(n_ex) * n_labels, 0.0);
  if (p.c == 0.0) return sol;

  if (warm) {
    if (warm->size() != sol.omega.size())
      throw std::invalid_argument("warm start size mismatch");
    for (int n = 0; n < n_ex; ++n) {
      std::vector<double> block(n_labels);
      for (int y = 0; y < n_labels; ++y) block[y] = (*warm)[n * n_labels + y];
      for (double& w : block) w = std::max(w, 0.0);
      detail::project_simplex(block, p.c);
      for (int y = 0; y < n_labels; ++y) sol.omega[n * n_labels + y] = block[y];
    }
  } else {
    // Cold start: all mass on the most expensive label (lowest index wins
    // ties), which is exact whenever the quadratic part vanishes.
    for (int n = 0; n < n_ex; ++n) {
      int top = 0;
      for (int y = 1; y < n_labels; ++y)
        if (p.cost(n, y) > p.cost(n, top)) top = y;
      sol.omega[n * n_labels + top] = p.c;
    }
  }

  // Block Gram matrices H_n[y][y'] = <delta_y, delta_y'>.
  std::vector<std::vector<double>> gram(n_ex);
  std::vector<double> lip(n_ex, 0.0);
  for (int n = 0; n < n_ex; ++n) {
    gram[n].assign(static_cast<std::size_t>(n_labels) * n_labels, 0.0);
    for (int y = 0; y < n_labels; ++y)
      for (int z = y; z < n_labels; ++z) {
        const double h = detail::dot(p.delta[n][y], p.delta[n][z]);
        gram[n][y * n_labels + z] = h;
        gram[n][z * n_labels + y] = h;
      }
    double row_max = 0.0;
    for (int y = 0; y < n_labels; ++y) {
      double row = 0.0;
      for (int z = 0; z < n_labels; ++z)
        row += std::abs(gram[n][y * n_labels + z]);
      row_max = std::max(row_max, row);
    }
    lip[n] = row_max;  // inf-norm bound on the top eigenvalue
  }

  std::vector<double> mu = classifier_mean(p, sol.omega);
  std::vector<double> block(n_labels), grad(n_labels), rest(n_labels);
  for (int pass = 1; pass <= max_passes; ++pass) {
    sol.iterations = pass;
    for (int n = 0; n < n_ex; ++n) {
      for (int y = 0; y < n_labels; ++y) block[y] = sol.omega[n * n_labels + y];
      // <mu_without_n, delta_y> = <mu, delta_y> - (H_n block)_y.
      for (int y = 0; y < n_labels; ++y) {
        double hb = 0.0;
        for (int z = 0; z < n_labels; ++z)
          hb += gram[n][y * n_labels + z] * block[z];
        rest[y] = detail::dot(mu, p.delta[n][y]) - hb;
      }
      if (lip[n] == 0.0) {
        // Purely linear block: jump to the best vertex.
        int top = 0;
        for (int y = 1; y < n_labels; ++y)
          if (p.cost(n, y) - rest[y] > p.cost(n, top) - rest[top]) top = y;
        std::fill(block.begin(), block.end(), 0.0);
        block[top] = p.c;
      } else {
        const double step_raw = 1.0 / lip[n];
        for (int it = 0; it < 50; ++it) {
          for (int y = 0; y < n_labels; ++y) {
            double hb = 0.0;
            for (int z = 0; z < n_labels; ++z)
              hb += gram[n][y * n_labels + z] * block[z];
            grad[y] = p.cost(n, y) - rest[y] - hb;
          }
          double gmax = 0.0;
          for (int y = 0; y < n_labels; ++y)
            gmax = std::max(gmax, std::abs(grad[y]));
          if (gmax == 0.0) break;  // stationary block
          // Near-singular blocks (decayed feature columns) make 1/lip so
          // large that the candidate overwhelms the projection's threshold
          // arithmetic; capping the move at a few simplex diameters keeps
          // the iterate well-scaled and shorter steps stay valid ascent.
          const double step = std::min(step_raw, 64.0 * p.c / gmax);
          double moved = 0.0;
          std::vector<double> next(n_labels);
          for (int y = 0; y < n_labels; ++y) next[y] = block[y] + step * grad[y];
          detail::project_simplex(next, p.c);
          for (int y = 0; y < n_labels; ++y)
            moved = std::max(moved, std::abs(next[y] - block[y]));
          block.swap(next);
          if (moved <= 1e-10) break;
        }
      }
      for (int y = 0; y < n_labels; ++y) {
        const double diff = block[y] - sol.omega[n * n_labels + y];
        if (diff != 0.0) {
          const auto& d = p.delta[n][y];
          for (std::size_t j = 0; j < dim; ++j) mu[j] += diff * d[j];
          sol.omega[n * n_labels + y] = block[y];
        }
      }
    }
    sol.kkt_violation = kkt_residual(p, sol.omega);
    if (sol.kkt_violation <= tol) break;
  }
  return sol;
}

}  // namespace regbayes
