#include "dualhorizon/linear_mhe.hpp"

#include <cmath>
#include <limits>

#include "detail.hpp"
#include "dualhorizon/errors.hpp"

namespace dualhorizon::detail {

Matrix horizon_pinv_block(const Matrix& a, const Matrix& c, int horizon, const Matrix& r) {
  const Eigen::Index n = a.rows();
  const Eigen::Index p = c.rows();
  const Matrix st = Matrix(Eigen::LLT<Matrix>(r).matrixL()).transpose();
  Matrix stack(p * horizon, n);
  Matrix block = st * c;
  for (int i = 0; i < horizon; ++i) {
    stack.middleRows(i * p, p) = block;
    block = block * a;
  }
  const Eigen::HouseholderQR<Matrix> qr(stack);
  const Matrix q = qr.householderQ() * Matrix::Identity(stack.rows(), n);
  const Matrix rhs = q.bottomRows(p).transpose() * st;
  return qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().solve(rhs);
}

}  // namespace dualhorizon::detail

namespace dualhorizon::mhe {

namespace {

void require_vector(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + " has " + std::to_string(v.size()) +
                         " entries, expected " + std::to_string(n));
  }
}

}  // namespace

HorizonWeights horizon_weights(const Matrix& a, const Matrix& c, int horizon,
                               const Matrix& r) {
  const Matrix w = observability_stack(a, c, horizon);
  detail::require_weight(r, c.rows(), "R");
  if (!is_full_column_rank(w)) {
    throw SynthesisError("observability stack [C; CA; ...; CA^{N-1}] lacks full "
                         "column rank for N = " + std::to_string(horizon));
  }
  HorizonWeights out;
  out.horizon = horizon;
  out.R = r;
  out.Q = Matrix::Zero(a.rows(), a.cols());
  Matrix ca = c;
  for (int i = 0; i < horizon - 1; ++i) {
    out.Q += ca.transpose() * r * ca;
    ca = ca * a;
  }
  out.H = ca.transpose() * r * ca;
  // Symmetrize to remove roundoff asymmetry.
  out.Q = 0.5 * (out.Q + out.Q.transpose());
  out.H = 0.5 * (out.H + out.H.transpose());
  return out;
}

Vector optimal_eta(const HorizonWeights& w, const Matrix& a, const Matrix& c,
                   const Vector& z, const Vector& y) {
  require_vector(z, a.rows(), "z");
  require_vector(y, c.rows(), "y");
  const Matrix last = c * linalg::power(a, w.horizon - 1);
  const Vector rhs = last.transpose() * w.R * y + w.Q * z;
  return linalg::solve_symmetric(w.total(), rhs, "Q+H");
}

double cost_J(const Matrix& a, const Matrix& c, const Matrix& r, int horizon,
              const Vector& xi, const Vector& z, const Vector& y) {
  require_vector(xi, a.rows(), "xi");
  require_vector(z, a.rows(), "z");
  require_vector(y, c.rows(), "y");
  if (horizon < 1) throw DimensionError("horizon N must be >= 1");
  double total = 0.0;
  Matrix ca = c;
  const Vector diff = xi - z;
  for (int i = 0; i < horizon - 1; ++i) {
    total += linalg::weighted_norm_sq(ca * diff, r);
    ca = ca * a;
  }
  total += linalg::weighted_norm_sq(ca * xi - y, r);
  return total;
}

ObserverGain observer_gain(const Matrix& a, const Matrix& c, int horizon,
                           const Matrix& r) {
  const HorizonWeights w = horizon_weights(a, c, horizon, r);
  ObserverGain out;
  out.L = linalg::power(a, horizon) * detail::horizon_pinv_block(a, c, horizon, r);
  out.spectral_radius = linalg::spectral_radius(a - out.L * c);
  out.Q = w.Q;
  out.H = w.H;
  return out;
}

CostDecomposition cost_decomposition(const HorizonWeights& w, const Matrix& a,
                                     const Matrix& c, const Vector& z,
                                     const Vector& x_delayed) {
  const Vector y = c * linalg::power(a, w.horizon - 1) * x_delayed;
  const Vector eta = optimal_eta(w, a, c, z, y);
  CostDecomposition t;
  t.cost = cost_J(a, c, w.R, w.horizon, eta, z, y);
  t.descent = linalg::weighted_norm_sq(eta - x_delayed, w.total());
  t.prior = linalg::weighted_norm_sq(z - x_delayed, w.Q);
  return t;
}

double decomposition_residual(const HorizonWeights& w, const Matrix& a, const Matrix& c,
                       const Vector& z, const Vector& x_delayed) {
  return cost_decomposition(w, a, c, z, x_delayed).residual();
}

double symmetry_residual(const HorizonWeights& w) {
  const Matrix total = w.total();
  const Matrix left = w.Q * linalg::solve_symmetric(total, w.H, "Q+H");
  const Matrix right = w.H * linalg::solve_symmetric(total, w.Q, "Q+H");
  return linalg::max_abs(left - right);
}

double closed_form_cost_residual(const HorizonWeights& w, const Matrix& a,
                                 const Matrix& c, const Vector& z,
                                 const Vector& x_delayed) {
  const Vector y = c * linalg::power(a, w.horizon - 1) * x_delayed;
  const Vector eta = optimal_eta(w, a, c, z, y);
  const double cost = cost_J(a, c, w.R, w.horizon, eta, z, y);
  const Vector e = z - x_delayed;
  const double closed =
      e.dot(w.H * Vector(linalg::solve_symmetric(w.total(), w.Q * e, "Q+H")));
  return std::abs(cost - closed) / (1.0 + std::abs(cost) + std::abs(closed));
}

double descent_form_residual(const HorizonWeights& w, const Matrix& a,
                             const Matrix& c, const Vector& z,
                             const Vector& x_delayed) {
  const Vector y = c * linalg::power(a, w.horizon - 1) * x_delayed;
  const Vector eta = optimal_eta(w, a, c, z, y);
  const double lhs = linalg::weighted_norm_sq(eta - x_delayed, w.total());
  const Vector qe = w.Q * (z - x_delayed);
  const double rhs = qe.dot(Vector(linalg::solve_symmetric(w.total(), qe, "Q+H")));
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
}

LyapunovStep lyap_decrement(const HorizonWeights& w, const Matrix& a,
                            const Matrix& c, const Vector& z,
                            const Vector& x_delayed) {
  const Vector y = c * linalg::power(a, w.horizon - 1) * x_delayed;
  const Vector eta = optimal_eta(w, a, c, z, y);
  LyapunovStep out;
  out.lhs = linalg::weighted_norm_sq(a * (eta - x_delayed), w.Q);
  out.rhs = linalg::weighted_norm_sq(z - x_delayed, w.Q) -
            cost_J(a, c, w.R, w.horizon, eta, z, y);
  return out;
}

double claim_delta(int horizon, const Matrix& w_stack, const Matrix& a,
                   const Matrix& r, double eps) {
  if (horizon < 1) throw DimensionError("horizon N must be >= 1");
  const double n = horizon;
  const Matrix an = linalg::power(a, horizon);
  const double growth = linalg::lambda_max(an.transpose() * an);
  const double numerator = 6.0 * linalg::lambda_min(w_stack.transpose() * w_stack) *
                           linalg::lambda_min(r) * eps * eps;
  const double denominator = (2.0 * n * n * n + 3.0 * n * n + n) * growth;
  if (!(denominator > 0.0)) return std::numeric_limits<double>::infinity();
  return numerator / denominator;
}

Trace run(const Matrix& a, const Matrix& c, int horizon, const Matrix& r,
          const Vector& z0, const Vector& x0, int steps) {
  if (steps < 0) throw ConfigError({"steps: must be >= 0"});
  const HorizonWeights w = horizon_weights(a, c, horizon, r);
  require_vector(z0, a.rows(), "z0");
  const std::vector<Vector> xs = iterate_autonomous(LinearSystem(a, {}, c), x0, steps);
  const Matrix lift = linalg::power(a, horizon - 1);
  Trace trace;
  trace.reserve(steps + 1);
  Vector z = z0;
  for (int k = 0; k <= steps; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.x = xs[k];
    rec.y = c * xs[k];
    rec.z = z;
    rec.xhat = lift * z;
    rec.err_norm = (rec.xhat - rec.x).norm();
    const Vector eta = optimal_eta(w, a, c, z, *rec.y);
    require_finite(eta, "eta", k);
    rec.eta = eta;
    rec.cost_J = cost_J(a, c, r, horizon, eta, z, *rec.y);
    if (k >= horizon - 1) {
      const Vector& tx = xs[k - horizon + 1];
      rec.x_delayed = tx;
      rec.lyap_lhs = linalg::weighted_norm_sq(a * (eta - tx), w.Q);
      rec.lyap_rhs = linalg::weighted_norm_sq(z - tx, w.Q) - *rec.cost_J;
      const double descent = linalg::weighted_norm_sq(eta - tx, w.total());
      const double prior = linalg::weighted_norm_sq(z - tx, w.Q);
      rec.identity_residual = std::abs(*rec.cost_J + descent - prior) /
                              (1.0 + *rec.cost_J + descent + prior);
    }
    z = a * eta;
    trace.push_back(std::move(rec));
  }
  return trace;
}

Trace run_gain_form(const Matrix& a, const Matrix& c, const Matrix& gain,
                    const Vector& xhat0, const Vector& x0, int steps) {
  if (steps < 0) throw ConfigError({"steps: must be >= 0"});
  require_vector(xhat0, a.rows(), "xhat0");
  const std::vector<Vector> xs = iterate_autonomous(LinearSystem(a, {}, c), x0, steps);
  Trace trace;
  trace.reserve(steps + 1);
  Vector xhat = xhat0;
  for (int k = 0; k <= steps; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.x = xs[k];
    rec.y = c * xs[k];
    rec.xhat = xhat;
    rec.err_norm = (xhat - rec.x).norm();
    xhat = a * xhat + gain * (*rec.y - c * xhat);
    require_finite(xhat, "estimate", k + 1);
    trace.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace dualhorizon::mhe
