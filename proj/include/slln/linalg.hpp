#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace slln {

using Scalar = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

namespace tol {
// Global tolerances: algebraic identities vs. norm comparisons.
inline constexpr double kExact = 1e-12;
inline constexpr double kNorm = 1e-10;
}  // namespace tol

inline Matrix identity(Eigen::Index dim) { return Matrix::Identity(dim, dim); }

/// Largest entrywise modulus.
inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Spectral norm (largest singular value).
double spectral_norm(const Matrix& m);

}  // namespace slln
