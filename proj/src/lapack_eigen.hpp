#pragma once

#include "fsar/types.hpp"

#include <Eigen/Core>

namespace fsar::detail {

/// Eigenvalues of a dense nonsymmetric matrix through the system LAPACK
/// (dgeev), loaded at first use. Returns false when LAPACK is unavailable,
/// disabled with FSAR_LAPACK=0, or the result fails the power-sum check;
/// the caller then falls back to Eigen. `a` is overwritten.
bool lapack_eigenvalues(Matrix& a, Eigen::VectorXcd& values);

}  // namespace fsar::detail
