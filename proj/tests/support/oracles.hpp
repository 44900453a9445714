#pragma once

// Independent reference computations. Nothing here calls into the library's
// numerical code; only the plain data types are shared.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix mpow(const Matrix& a, int k) {
  Matrix out = Matrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

inline Matrix sqrt_spd(const Matrix& r) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(r);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

inline Matrix pinv(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  Matrix sinv = Matrix::Zero(m.cols(), m.rows());
  const double cut = 1e-13 * (s.size() ? s(0) : 0.0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) sinv(i, i) = 1.0 / s(i);
  }
  return svd.matrixV() * sinv * svd.matrixU().transpose();
}

inline double spectral_radius(const Matrix& m) {
  Eigen::ComplexEigenSolver<Matrix> es(m);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Least-energy inputs by nullspace elimination: with v_i = R^{1/2} s_i the
/// program becomes min |s|^2 subject to M R^{1/2} s = d, solved by the
/// pseudoinverse. M = [A^{N-1}B, ..., B], d = A^N (x - xhat).
struct QpSolution {
  std::vector<Vector> inputs;
  double cost = 0.0;
};

inline QpSolution min_energy_qp(const Matrix& a, const Matrix& b, int horizon,
                                const Matrix& r, const Vector& xhat, const Vector& x) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Matrix big(n, m * horizon);
  Matrix rhalf = Matrix::Zero(m * horizon, m * horizon);
  const Matrix rs = sqrt_spd(r);
  for (int i = 0; i < horizon; ++i) {
    big.block(0, m * i, n, m) = mpow(a, horizon - 1 - i) * b;
    rhalf.block(m * i, m * i, m, m) = rs;
  }
  const Vector d = mpow(a, horizon) * (x - xhat);
  const Vector s = pinv(big * rhalf) * d;
  const Vector v = rhalf * s;
  QpSolution out;
  out.cost = s.squaredNorm();
  for (int i = 0; i < horizon; ++i) out.inputs.push_back(v.segment(m * i, m));
  return out;
}

/// argmin_xi of the moving-horizon cost by stacked weighted least squares:
/// rows R^{1/2} C A^i (xi - z) for i < N-1 and R^{1/2} (C A^{N-1} xi - y).
inline Vector mhe_eta(const Matrix& a, const Matrix& c, int horizon, const Matrix& r,
                      const Vector& z, const Vector& y) {
  const Eigen::Index p = c.rows();
  const Eigen::Index n = a.rows();
  const Matrix rs = sqrt_spd(r);
  Matrix lhs(p * horizon, n);
  Vector rhs(p * horizon);
  for (int i = 0; i < horizon; ++i) {
    const Matrix row = rs * c * mpow(a, i);
    lhs.block(p * i, 0, p, n) = row;
    rhs.segment(p * i, p) = i < horizon - 1 ? Vector(row * z) : Vector(rs * y);
  }
  return lhs.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
}

/// Observer gain read off the least-squares map: with z = 0 the update is
/// A^N eta(0, y), linear in y.
inline Matrix mhe_gain(const Matrix& a, const Matrix& c, int horizon, const Matrix& r) {
  const Eigen::Index p = c.rows();
  Matrix l(a.rows(), p);
  for (Eigen::Index j = 0; j < p; ++j) {
    l.col(j) = mpow(a, horizon) *
               mhe_eta(a, c, horizon, r, Vector::Zero(a.rows()), Vector::Unit(p, j));
  }
  return l;
}

/// Full enumeration of |U|^N input sequences in lexicographic index order.
struct Enumeration {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> argmin;  // first optimal sequence (lexicographic)
  int optimal_count = 0;
  long long sequences = 0;
};

inline Enumeration enumerate(
    int horizon, int alphabet,
    const std::function<double(const std::vector<int>&, bool& feasible)>& evaluate) {
  Enumeration out;
  std::vector<int> seq(horizon, 0);
  while (true) {
    ++out.sequences;
    bool feasible = true;
    const double v = evaluate(seq, feasible);
    if (feasible) {
      const double tie = 1e-12 * (1.0 + std::abs(out.best));
      if (v < out.best - tie || out.argmin.empty()) {
        out.best = v;
        out.argmin = seq;
        out.optimal_count = 1;
      } else if (std::abs(v - out.best) <= tie) {
        ++out.optimal_count;
      }
    }
    int pos = horizon - 1;
    while (pos >= 0 && ++seq[pos] == alphabet) seq[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

}  // namespace oracle
