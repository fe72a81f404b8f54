// Minimal row-major dense matrix storage for coordinate-wise updates.
// Copyright (c) 2026 RegBayes Contributors
// Licensed under Apache 2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace regbayes {

// Flat row-major matrix.  The inference updates are all element-wise
// coordinate formulas, so this deliberately stays a storage type: accessors,
// no algebra.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("negative matrix shape");
  }

  double& operator()(int i, int j) {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
  double operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }

  double& at(int i, int j) {
    check(i, j);
    return (*this)(i, j);
  }
  double at(int i, int j) const {
    check(i, j);
    return (*this)(i, j);
  }

  bool empty() const { return data.empty(); }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }

 private:
  void check(int i, int j) const {
    if (i < 0 || i >= rows || j < 0 || j >= cols)
      throw std::out_of_range("matrix index out of range");
  }
};

}  // namespace regbayes
