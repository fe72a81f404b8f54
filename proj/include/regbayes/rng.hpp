// Deterministic random draws with fixed algorithms, reproducible bit-for-bit.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace regbayes {

// std:: distribution objects are free to differ across standard libraries, so
// fitted artifacts built on them would not be byte-stable.  This wrapper pins
// the algorithms: mt19937_64 bit stream, open-interval uniform from the top
// 53 bits, plain Box-Muller normals (cosine branch only, no cached spare).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * kInv53;
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    const double u1 = uniform();
    const double u2 = uniform();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * kPi * u2);
  }

  // Beta(a, 1) by inverse CDF: U^(1/a).
  double beta_a1(double a) { return std::pow(uniform(), 1.0 / a); }

  bool bernoulli(double p) { return uniform() < p; }

  // Integer in [0, n) by rejection-free scaling; adequate for shuffles.
  int below(int n) { return static_cast<int>(uniform() * n) % n; }

 private:
  static constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
  static constexpr double kPi = 3.141592653589793238462643383279502884;
  std::mt19937_64 gen_;
};

}  // namespace regbayes
