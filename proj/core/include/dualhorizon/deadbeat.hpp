#pragma once

#include <functional>

#include "dualhorizon/system_model.hpp"

namespace dualhorizon::deadbeat {

/// L = A^n O^{-1} e_n for a scalar-output observable pair. Places every
/// eigenvalue of A - L C at the origin. Throws SynthesisError when the
/// observability matrix is singular.
Matrix observer_gain(const Matrix& a, const Matrix& c);

/// K = e_n^T Ctrb^{-1} A^n for a scalar-input controllable pair.
Matrix tracker_gain(const Matrix& a, const Matrix& b);

/// eta = z + O^{-1} e_n (y - C A^{n-1} z), scalar output, N = n.
Vector closed_form_eta(const Matrix& a, const Matrix& c, const Vector& z,
                       double y);

/// How the stacked output equations
///   h(f^i eta) = h(f^i z), i < N-1;  h(f^{N-1} eta) = y
/// are solved.
struct EquationStackSolver {
  enum class Strategy { kExactLinear, kNewton, kClosedForm };
  using ClosedForm = std::function<Vector(const NonlinearSystem&, int horizon,
                                          const Vector& z, const Vector& y)>;

  Strategy strategy = Strategy::kNewton;
  double tolerance = 1e-10;  // per equation, scaled by 1 + max|y|
  int max_iterations = 100;
  double fd_step_scale = 1e-6;
  ClosedForm closed_form;
};

/// Largest absolute residual of the stacked equations at eta.
double stack_residual(const NonlinearSystem& sys, int horizon, const Vector& eta,
                      const Vector& z, const Vector& y);

/// Solves the equation stack. Newton starts at eta = z, uses a central
/// finite-difference Jacobian and halves the step until the residual drops.
/// Throws SolverError (with the best residual) when the tolerance is not met.
Vector select_eta(const NonlinearSystem& sys, int horizon, const Vector& z,
                  const Vector& y, const EquationStackSolver& solver = {});

/// Runs z+ = f(eta), x̂ = f^{N-1}(z) against the plant x+ = f(x) for `steps`
/// updates. The trace holds steps + 1 records (k = 0..steps).
Trace run_observer(const NonlinearSystem& sys, int horizon, const Vector& z0,
                   const Vector& plant_x0, int steps,
                   const EquationStackSolver& solver = {});

}  // namespace dualhorizon::deadbeat
