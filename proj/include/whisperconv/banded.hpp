// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "whisperconv/spectral.hpp"

namespace whisperconv {

// Symmetric positive-definite band matrix, lower storage:
// band(i, k) holds A(i, i - k) for k in [0, bandwidth].
class BandedSpdMatrix {
 public:
  BandedSpdMatrix(Eigen::Index n, int bandwidth)
      : band_(Matrix::Zero(n, bandwidth + 1)), bandwidth_(bandwidth) {}

  Eigen::Index size() const { return band_.rows(); }
  int bandwidth() const { return bandwidth_; }
  // Requires |i - j| <= bandwidth.
  double& at(Eigen::Index i, Eigen::Index j) { return i >= j ? band_(i, i - j) : band_(j, j - i); }
  double at(Eigen::Index i, Eigen::Index j) const { return i >= j ? band_(i, i - j) : band_(j, j - i); }

  Eigen::MatrixXd to_dense() const;
  // Banded Cholesky solve. Throws DimensionError if A is not positive definite.
  Vector solve(const Vector& rhs) const;

 private:
  Matrix band_;
  int bandwidth_;
};

}  // namespace whisperconv
