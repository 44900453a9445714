#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dualhorizon/linalg.hpp"

namespace dualhorizon::nl {

/// Evaluable class-K-infinity function.
using ClassKFunction = std::function<double(double)>;

/// Symmetric nonnegative discrepancy l(v, w) with bounds
/// alpha1(|v - w|) <= l(v, w) <= alpha2(|v - w|).
struct StageCost {
  using Cost = std::function<double(const Vector&, const Vector&)>;
  using Residual = std::function<Vector(const Vector&, const Vector&)>;

  std::string name;
  Cost cost;
  /// Optional least-squares form: l(v, w) = |residual(v, w)|^2. Enables the
  /// Gauss-Newton paths of the minimizers.
  Residual residual;
  ClassKFunction alpha1;
  ClassKFunction alpha2;

  double operator()(const Vector& v, const Vector& w) const { return cost(v, w); }
  bool has_residual() const { return static_cast<bool>(residual); }
};

/// l(v, w) = |v - w|^2_W for symmetric positive semidefinite W. The bounds
/// use the extreme eigenvalues of W.
StageCost quadratic(const Matrix& weight);

/// l(v, w) = sum_i |v_i - w_i|.
StageCost absolute(int dim);

/// l(v, w) = g(|v - w|) with g piecewise linear through (distance, value)
/// points, extended linearly past the last point. Points must start at
/// (0, 0) and be strictly increasing in both coordinates.
StageCost tabulated(std::vector<std::pair<double, double>> points);

/// Parses "abs", "quad" (identity), "quad:c" (c I) or "quad:r1,r2,..."
/// (diagonal). `dim` is the argument dimension.
StageCost parse_stage_cost(const std::string& spec, int dim);

/// Parses "quad:c" (c s^2), "lin:c" (c s) or "identity".
ClassKFunction parse_class_k(const std::string& spec);

/// Spot check of monotonicity on 20 log-spaced points in [1e-6, 1e3], plus
/// alpha(0) = 0.
bool is_class_k_on_grid(const ClassKFunction& alpha);

struct StageCostCheck {
  int samples = 0;
  double max_asymmetry = 0.0;   // |l(v,w) - l(w,v)|
  double max_self_cost = 0.0;   // |l(v,v)|
  int bound_violations = 0;     // alpha1 <= l <= alpha2 failures
  bool alpha1_monotone = true;
  bool alpha2_monotone = true;

  bool ok(double tol = 1e-12) const {
    return max_asymmetry <= tol && max_self_cost <= tol && bound_violations == 0 &&
           alpha1_monotone && alpha2_monotone;
  }
};

/// Samples pairs uniformly in [lower, upper] and checks the stage-cost axioms.
StageCostCheck check_stage_cost(const StageCost& cost, const Vector& lower,
                                const Vector& upper, int samples,
                                std::uint64_t seed);

}  // namespace dualhorizon::nl
