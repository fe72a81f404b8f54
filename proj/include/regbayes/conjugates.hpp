// Hinge-style losses and their closed-form Fenchel conjugates.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace regbayes {

// Conjugates of indicator-constrained losses evaluate to either a finite real
// or "infeasible" (the supremum is unbounded).  Infeasible compares greater
// than every finite value, so solvers can treat it as a violated constraint
// instead of letting a floating infinity leak into arithmetic.
class ExtendedValue {
 public:
  static ExtendedValue finite(double v) {
    if (std::isnan(v)) throw std::invalid_argument("finite value cannot be NaN");
    return ExtendedValue(false, v);
  }
  static ExtendedValue infeasible() { return ExtendedValue(true, 0.0); }

  bool is_finite() const { return !infeasible_; }
  bool is_infeasible() const { return infeasible_; }

  double value() const {
    if (infeasible_) throw std::logic_error("value() on infeasible result");
    return value_;
  }

  friend bool operator==(const ExtendedValue& a, const ExtendedValue& b) {
    if (a.infeasible_ || b.infeasible_) return a.infeasible_ == b.infeasible_;
    return a.value_ == b.value_;
  }
  friend bool operator<(const ExtendedValue& a, const ExtendedValue& b) {
    if (a.infeasible_) return false;       // infeasible is the top element
    if (b.infeasible_) return true;
    return a.value_ < b.value_;
  }
  friend bool operator>(const ExtendedValue& a, const ExtendedValue& b) {
    return b < a;
  }

 private:
  ExtendedValue(bool inf, double v) : infeasible_(inf), value_(v) {}
  bool infeasible_;
  double value_;
};

namespace detail {
inline void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
inline void require_finite(double x, const char* msg) {
  require(!std::isnan(x) && !std::isinf(x), msg);
}
}  // namespace detail

// Scaled hinge: C * max(0, x).
inline double hinge(double x, double c) {
  detail::require_finite(x, "hinge: x must be finite");
  detail::require(c > 0.0, "hinge: C must be positive");
  return c * (x > 0.0 ? x : 0.0);
}

// Conjugate of the scaled hinge: 0 on [0, C], infeasible outside.
inline ExtendedValue hinge_conj(double mu, double c) {
  detail::require_finite(mu, "hinge_conj: mu must be finite");
  detail::require(c > 0.0, "hinge_conj: C must be positive");
  if (mu >= 0.0 && mu <= c) return ExtendedValue::finite(0.0);
  return ExtendedValue::infeasible();
}

// Scaled coordinate maximum: C * max_i x_i.
inline double scaled_max(const std::vector<double>& x, double c) {
  detail::require(!x.empty(), "scaled_max: empty vector");
  detail::require(c > 0.0, "scaled_max: C must be positive");
  double m = x[0];
  for (double xi : x) {
    detail::require_finite(xi, "scaled_max: entries must be finite");
    if (xi > m) m = xi;
  }
  return c * m;
}

// Conjugate of the scaled maximum: 0 on the scaled simplex
// { mu >= 0, sum mu = C }, infeasible outside.  The sum check uses an
// absolute tolerance because callers hand in solver output.
inline ExtendedValue scaled_max_conj(const std::vector<double>& mu, double c,
                                     double tol_sum = 1e-9) {
  detail::require(!mu.empty(), "scaled_max_conj: empty vector");
  detail::require(c > 0.0, "scaled_max_conj: C must be positive");
  double sum = 0.0;
  for (double m : mu) {
    detail::require_finite(m, "scaled_max_conj: entries must be finite");
    if (m < 0.0) return ExtendedValue::infeasible();
    sum += m;
  }
  if (std::abs(sum - c) > tol_sum) return ExtendedValue::infeasible();
  return ExtendedValue::finite(0.0);
}

// Epsilon-insensitive loss: C * max(0, |x - y| - eps).
inline double eps_insensitive(double x, double y, double eps, double c) {
  detail::require_finite(x, "eps_insensitive: x must be finite");
  detail::require_finite(y, "eps_insensitive: y must be finite");
  detail::require(eps >= 0.0, "eps_insensitive: eps must be nonnegative");
  detail::require(c > 0.0, "eps_insensitive: C must be positive");
  const double r = std::abs(x - y) - eps;
  return c * (r > 0.0 ? r : 0.0);
}

// Conjugate of the epsilon-insensitive loss:
// mu*y + eps*|mu| on [-C, C], infeasible outside.
inline ExtendedValue eps_insensitive_conj(double mu, double y, double eps,
                                          double c) {
  detail::require_finite(mu, "eps_insensitive_conj: mu must be finite");
  detail::require_finite(y, "eps_insensitive_conj: y must be finite");
  detail::require(eps >= 0.0, "eps_insensitive_conj: eps must be nonnegative");
  detail::require(c > 0.0, "eps_insensitive_conj: C must be positive");
  if (std::abs(mu) > c) return ExtendedValue::infeasible();
  return ExtendedValue::finite(mu * y + eps * std::abs(mu));
}

}  // namespace regbayes
