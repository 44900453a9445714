#include "dualhorizon/min_energy.hpp"

#include <string>

#include "detail.hpp"
#include "dualhorizon/deadbeat.hpp"
#include "dualhorizon/errors.hpp"
#include "dualhorizon/linear_mhe.hpp"

namespace dualhorizon::min_energy {

Matrix weighted_gramian(const Matrix& a, const Matrix& b, int horizon,
                        const Matrix& r) {
  const Matrix ctrb = controllability_stack(a, b, horizon);
  detail::require_weight(r, b.cols(), "R");
  if (!is_full_row_rank(ctrb)) {
    throw SynthesisError("controllability stack [B, AB, ..., A^{N-1}B] lacks full "
                         "row rank for N = " + std::to_string(horizon));
  }
  Matrix g = Matrix::Zero(a.rows(), a.rows());
  Matrix ab = b;
  for (int i = 0; i < horizon; ++i) {
    g += ab * r * ab.transpose();
    ab = a * ab;
  }
  return 0.5 * (g + g.transpose());
}

Matrix kleinman_gain(const Matrix& a, const Matrix& b, int horizon, const Matrix& r) {
  weighted_gramian(a, b, horizon, r);  // shape, weight and rank checks
  return detail::horizon_pinv_block(a.transpose(), b.transpose(), horizon, r).transpose() *
         linalg::power(a, horizon);
}

Solution solve(const Matrix& a, const Matrix& b, int horizon, const Matrix& r,
               const Vector& xhat, const Vector& x) {
  if (xhat.size() != a.rows() || x.size() != a.rows()) {
    throw DimensionError("solve: x̂ and x must have " + std::to_string(a.rows()) +
                         " entries");
  }
  if (!xhat.allFinite() || !x.allFinite()) {
    throw DivergenceError("solve: non-finite initial state");
  }
  const Matrix g = weighted_gramian(a, b, horizon, r);
  const Matrix an = linalg::power(a, horizon);
  // G^{-1} A^N (x - x̂), shared by every v_i.
  const Vector costate = linalg::solve_symmetric(g, an * (x - xhat), "gramian G");

  Solution out;
  out.inputs.resize(horizon);
  Matrix apow_b = b;  // A^{N-1-i} B, filled from the last input backwards
  for (int i = horizon - 1; i >= 0; --i) {
    out.inputs[i] = r * apow_b.transpose() * costate;
    apow_b = a * apow_b;
  }
  out.states.reserve(horizon + 1);
  out.states.push_back(xhat);
  const Matrix r_inv = linalg::inverse_symmetric(r, "R");
  for (int i = 0; i < horizon; ++i) {
    out.states.push_back(a * out.states.back() + b * out.inputs[i]);
    out.cost += linalg::weighted_norm_sq(out.inputs[i], r_inv);
  }
  out.gain = kleinman_gain(a, b, horizon, r);
  out.terminal_residual = (out.states.back() - an * x).norm();
  return out;
}

double optimal_cost_V(const Matrix& a, const Matrix& b, int horizon, const Matrix& r,
                      const Vector& xhat, const Vector& x) {
  if (xhat.size() != a.rows() || x.size() != a.rows()) {
    throw DimensionError("optimal_cost_V: x̂ and x must have " +
                         std::to_string(a.rows()) + " entries");
  }
  const Matrix g = weighted_gramian(a, b, horizon, r);
  const Vector e = linalg::power(a, horizon) * (xhat - x);
  return e.dot(Vector(linalg::solve_symmetric(g, e, "gramian G")));
}

Matrix tracker_stage_weight(const Matrix& b, const Matrix& r) {
  if (b.size() == 0) throw DimensionError("tracker_stage_weight: empty B");
  detail::require_weight(r, b.cols(), "R");
  if (!is_full_column_rank(b)) {
    throw SynthesisError("tracker_stage_weight: B must have full column rank");
  }
  const Matrix btb_inv = linalg::inverse_symmetric(b.transpose() * b, "B^T B");
  const Matrix q = b * btb_inv * linalg::inverse_symmetric(r, "R") * btb_inv * b.transpose();
  return 0.5 * (q + q.transpose());
}

bool cost_is_definite(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  return s.size() > 0 && s(0) > 0.0 && s(s.size() - 1) > kDefaultRankTolerance * s(0);
}

Trace run_tracker(const Matrix& a, const Matrix& b, int horizon, const Matrix& r,
                  const Vector& xhat0, const Vector& x0, int steps) {
  if (steps < 0) throw ConfigError({"steps: must be >= 0"});
  const Matrix gain = kleinman_gain(a, b, horizon, r);
  const Matrix g = weighted_gramian(a, b, horizon, r);
  const Matrix an = linalg::power(a, horizon);
  const Matrix value_form =
      an.transpose() * linalg::solve_symmetric(g, an, "gramian G");
  const Matrix r_inv = linalg::inverse_symmetric(r, "R");
  if (xhat0.size() != a.rows()) throw DimensionError("xhat0 has the wrong dimension");
  const std::vector<Vector> xs = iterate_autonomous(LinearSystem(a, b), x0, steps);
  Trace trace;
  trace.reserve(steps + 1);
  Vector xhat = xhat0;
  for (int k = 0; k <= steps; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.x = xs[k];
    rec.xhat = xhat;
    const Vector e = xhat - rec.x;
    rec.err_norm = e.norm();
    rec.cost_V = e.dot(value_form * e);
    rec.u = gain * (rec.x - xhat);
    xhat = a * xhat + b * *rec.u;
    require_finite(xhat, "tracker state", k + 1);
    if (k > 0) {
      TraceRecord& prev = trace.back();
      prev.lyap_lhs = *rec.cost_V - *prev.cost_V;
      prev.lyap_rhs = -linalg::weighted_norm_sq(*prev.u, r_inv);
    }
    trace.push_back(std::move(rec));
  }
  return trace;
}

Matrix dualize(const Matrix& a, const Matrix& b_or_c, int horizon, const Matrix& r,
               Direction direction, GainFamily family) {
  const Matrix at = a.transpose();
  const Matrix mt = b_or_c.transpose();
  if (family == GainFamily::kDeadbeat) {
    return direction == Direction::kControlToEstimation
               ? deadbeat::observer_gain(at, mt)
               : deadbeat::tracker_gain(at, mt);
  }
  return direction == Direction::kControlToEstimation
             ? mhe::observer_gain(at, mt, horizon, r).L
             : kleinman_gain(at, mt, horizon, r);
}

GainProblem GainProblem::dual() const {
  GainProblem out;
  out.kind = kind == Kind::kControl ? Kind::kEstimation : Kind::kControl;
  out.A = A.transpose();
  out.coupling = coupling.transpose();
  out.horizon = horizon;
  out.R = R;
  out.gain = gain.transpose();
  return out;
}

Matrix GainProblem::synthesize(GainFamily family) const {
  if (family == GainFamily::kDeadbeat) {
    return kind == Kind::kControl ? deadbeat::tracker_gain(A, coupling)
                                  : deadbeat::observer_gain(A, coupling);
  }
  return kind == Kind::kControl ? kleinman_gain(A, coupling, horizon, R)
                                : mhe::observer_gain(A, coupling, horizon, R).L;
}

}  // namespace dualhorizon::min_energy
