#include "dualhorizon/linalg.hpp"

#include <cmath>
#include <string>

#include "dualhorizon/errors.hpp"

namespace dualhorizon::linalg {

Matrix power(const Matrix& a, int k) {
  if (a.rows() != a.cols()) {
    throw DimensionError("matrix power: matrix is " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + ", expected square");
  }
  if (k < 0) throw DimensionError("matrix power: negative exponent");
  Matrix out = Matrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

Matrix solve_symmetric(const Matrix& m, const Matrix& rhs, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() != rhs.rows()) {
    throw DimensionError("solve: " + std::string(what) + " is " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         ", right-hand side has " + std::to_string(rhs.rows()) +
                         " rows");
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) {
    // A successful factorization of a nearly singular matrix can still be
    // garbage; accept only when the diagonal of L is well away from zero.
    const Eigen::VectorXd diag = Matrix(llt.matrixL()).diagonal();
    const double max_d = diag.cwiseAbs().maxCoeff();
    const double min_d = diag.cwiseAbs().minCoeff();
    if (min_d > 1e-8 * max_d) return llt.solve(rhs);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(1e-13);
  if (qr.rank() < m.rows()) {
    throw SynthesisError(std::string(what) + " is singular (rank " +
                         std::to_string(qr.rank()) + " of " +
                         std::to_string(m.rows()) + ")");
  }
  return qr.solve(rhs);
}

Matrix inverse_symmetric(const Matrix& m, std::string_view what) {
  return solve_symmetric(m, Matrix::Identity(m.rows(), m.cols()), what);
}

Eigen::VectorXcd eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("eigenvalues: matrix not square");
  if (a.size() == 0) return {};
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues();
}

double spectral_radius(const Matrix& a) {
  const Eigen::VectorXcd ev = eigenvalues(a);
  return ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
}

double lambda_min(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double lambda_max(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.transpose()) <= rel_tol * scale;
}

bool is_positive_definite(const Matrix& sym) {
  if (sym.size() == 0 || !is_symmetric(sym)) return false;
  return lambda_min(sym) > 0.0;
}

Matrix psd_square_root(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  const Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return roots.asDiagonal() * es.eigenvectors().transpose();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

double max_abs(const Matrix& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace dualhorizon::linalg
