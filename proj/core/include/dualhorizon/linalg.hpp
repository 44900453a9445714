#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string_view>

namespace dualhorizon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// A^k by repeated multiplication. A must be square, k >= 0.
Matrix power(const Matrix& a, int k);

/// Solves M x = rhs for symmetric M. Tries Cholesky first and falls back to a
/// column-pivoted QR; throws SynthesisError when M is numerically singular.
/// `what` names the matrix in the error message.
Matrix solve_symmetric(const Matrix& m, const Matrix& rhs,
                       std::string_view what = "matrix");

/// Inverse of a symmetric nonsingular matrix, same policy as solve_symmetric.
Matrix inverse_symmetric(const Matrix& m, std::string_view what = "matrix");

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Matrix& a);

Eigen::VectorXcd eigenvalues(const Matrix& a);

/// Extreme eigenvalues of a symmetric matrix.
double lambda_min(const Matrix& sym);
double lambda_max(const Matrix& sym);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);
bool is_positive_definite(const Matrix& sym);

/// S with S^T S = P for a symmetric positive semidefinite P. S is square.
Matrix psd_square_root(const Matrix& p);

/// ||v||_W^2 = v^T W v.
inline double weighted_norm_sq(const Vector& v, const Matrix& w) {
  return v.dot(w * v);
}

bool all_finite(const Matrix& m);

/// Maximum absolute entry; 0 for empty matrices.
double max_abs(const Matrix& m);

}  // namespace linalg
}  // namespace dualhorizon
