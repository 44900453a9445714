#include "dualhorizon/deadbeat.hpp"

#include <string>

#include "dualhorizon/errors.hpp"
#include "dualhorizon/minimizer.hpp"

namespace dualhorizon::deadbeat {

namespace {

Vector unit_last(Eigen::Index n) {
  Vector e = Vector::Zero(n);
  e(n - 1) = 1.0;
  return e;
}

Vector stack_residual_vector(const NonlinearSystem& sys, int horizon,
                             const Vector& eta, const Vector& z, const Vector& y) {
  const int p = sys.output_dim;
  Vector r(p * horizon);
  Vector fe = eta;
  Vector fz = z;
  for (int i = 0; i < horizon - 1; ++i) {
    r.segment(i * p, p) = sys.h(fe) - sys.h(fz);
    fe = sys.f(fe);
    fz = sys.f(fz);
  }
  r.segment((horizon - 1) * p, p) = sys.h(fe) - y;
  return r;
}

Vector solve_exact_linear(const NonlinearSystem& sys, int horizon, const Vector& z,
                          const Vector& y) {
  if (!sys.linear) {
    throw SolverError("exact-linear strategy requires a linear system", -1.0);
  }
  const Matrix& a = sys.linear->A();
  const Matrix& c = sys.linear->C();
  const Matrix w = observability_stack(a, c, horizon);
  if (!is_full_column_rank(w)) {
    throw SynthesisError("equation stack is not uniquely solvable: observability "
                         "stack lacks full column rank");
  }
  const Eigen::Index p = c.rows();
  Vector rhs = w * z;
  rhs.tail(p) = y;
  return w.colPivHouseholderQr().solve(rhs);
}

Vector solve_newton(const NonlinearSystem& sys, int horizon, const Vector& z,
                    const Vector& y, const EquationStackSolver& solver) {
  const auto residual = [&](const Vector& eta) {
    return stack_residual_vector(sys, horizon, eta, z, y);
  };
  const double threshold = solver.tolerance * (1.0 + y.cwiseAbs().maxCoeff());
  Vector eta = z;
  Vector r = residual(eta);
  double best = r.cwiseAbs().maxCoeff();
  for (int iter = 0; iter < solver.max_iterations && best > threshold; ++iter) {
    const Matrix jac = optim::fd_jacobian(residual, eta, solver.fd_step_scale);
    const Vector step = jac.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) break;
    const double norm0 = r.norm();
    bool accepted = false;
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      const Vector cand = eta + t * step;
      const Vector rc = residual(cand);
      if (rc.allFinite() && rc.norm() < norm0) {
        eta = cand;
        r = rc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    best = r.cwiseAbs().maxCoeff();
  }
  if (!(best <= threshold)) {
    throw SolverError("equation stack solver did not converge (best residual " +
                          std::to_string(best) + ")",
                      best);
  }
  return eta;
}

}  // namespace

Matrix observer_gain(const Matrix& a, const Matrix& c) {
  if (c.rows() != 1) {
    throw DimensionError("closed-form deadbeat observer gain needs a scalar output, C is " +
                         std::to_string(c.rows()) + "x" + std::to_string(c.cols()));
  }
  const int n = static_cast<int>(a.rows());
  const Matrix obs = observability_stack(a, c, n);
  if (!is_full_row_rank(obs)) {
    throw SynthesisError("(A, C) is not observable: observability matrix is singular");
  }
  return linalg::power(a, n) * obs.partialPivLu().solve(unit_last(n));
}

Matrix tracker_gain(const Matrix& a, const Matrix& b) {
  if (b.cols() != 1) {
    throw DimensionError("closed-form deadbeat tracker gain needs a scalar input, B is " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  const int n = static_cast<int>(a.rows());
  const Matrix ctrb = controllability_stack(a, b, n);
  if (!is_full_row_rank(ctrb)) {
    throw SynthesisError("(A, B) is not controllable: controllability matrix is singular");
  }
  const Vector row = ctrb.transpose().partialPivLu().solve(unit_last(n));
  return row.transpose() * linalg::power(a, n);
}

Vector closed_form_eta(const Matrix& a, const Matrix& c, const Vector& z, double y) {
  const int n = static_cast<int>(a.rows());
  const Matrix obs = observability_stack(a, c, n);
  if (c.rows() != 1 || !is_full_row_rank(obs)) {
    throw SynthesisError("closed-form eta needs an observable scalar-output pair");
  }
  const double innovation = y - (c * linalg::power(a, n - 1) * z)(0);
  return z + obs.partialPivLu().solve(unit_last(n)) * innovation;
}

double stack_residual(const NonlinearSystem& sys, int horizon, const Vector& eta,
                      const Vector& z, const Vector& y) {
  return stack_residual_vector(sys, horizon, eta, z, y).cwiseAbs().maxCoeff();
}

Vector select_eta(const NonlinearSystem& sys, int horizon, const Vector& z,
                  const Vector& y, const EquationStackSolver& solver) {
  if (horizon < 1) throw DimensionError("horizon N must be >= 1");
  if (z.size() != sys.state_dim || y.size() != sys.output_dim) {
    throw DimensionError("select_eta: z or y has the wrong dimension");
  }
  Vector eta;
  switch (solver.strategy) {
    case EquationStackSolver::Strategy::kExactLinear:
      eta = solve_exact_linear(sys, horizon, z, y);
      break;
    case EquationStackSolver::Strategy::kNewton:
      return solve_newton(sys, horizon, z, y, solver);
    case EquationStackSolver::Strategy::kClosedForm:
      if (!solver.closed_form) {
        throw SolverError("closed-form strategy selected without a closed form", -1.0);
      }
      eta = solver.closed_form(sys, horizon, z, y);
      break;
  }
  const double res = stack_residual(sys, horizon, eta, z, y);
  const double scale = 1.0 + y.cwiseAbs().maxCoeff();
  if (!(res <= solver.tolerance * scale)) {
    throw SolverError("equation stack residual " + std::to_string(res) +
                          " exceeds tolerance",
                      res);
  }
  return eta;
}

Trace run_observer(const NonlinearSystem& sys, int horizon, const Vector& z0,
                   const Vector& plant_x0, int steps,
                   const EquationStackSolver& solver) {
  if (horizon < 1) throw DimensionError("horizon N must be >= 1");
  if (steps < horizon) {
    throw ConfigError({"steps: must be >= N (" + std::to_string(horizon) + ")"});
  }
  if (z0.size() != sys.state_dim || plant_x0.size() != sys.state_dim) {
    throw DimensionError("run_observer: initial state has the wrong dimension");
  }
  const std::vector<Vector> xs = iterate_autonomous(sys, plant_x0, steps);
  Trace trace;
  trace.reserve(steps + 1);
  Vector z = z0;
  for (int k = 0; k <= steps; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.x = xs[k];
    rec.y = sys.h(xs[k]);
    rec.z = z;
    rec.xhat = sys.f_power(z, horizon - 1);
    require_finite(rec.xhat, "estimate", k);
    rec.err_norm = (rec.xhat - rec.x).norm();
    if (k >= horizon - 1) rec.x_delayed = xs[k - horizon + 1];
    rec.eta = select_eta(sys, horizon, z, *rec.y, solver);
    z = sys.f(*rec.eta);
    trace.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace dualhorizon::deadbeat
