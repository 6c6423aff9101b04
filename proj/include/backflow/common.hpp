// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace backflow {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<cplx>;

inline constexpr cplx I_unit{0.0, 1.0};

// Error taxonomy. The CLI maps these onto exit codes.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};
struct UnsupportedModelError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace backflow
