#pragma once

#include <functional>
#include <vector>

#include "dualhorizon/linalg.hpp"

namespace dualhorizon::optim {

using Objective = std::function<double(const Vector&)>;
using ResidualMap = std::function<Vector(const Vector&)>;

/// Search strategy for a small unconstrained (box-seeded) minimization.
///
/// The default seeds local searches from a coarse grid over the box and from
/// caller hints, then refines the best seeds with Levenberg-Marquardt damped
/// Gauss-Newton when a residual form is available and with Nelder-Mead
/// otherwise. Grid seeding is only used up to kMaxGridDim dimensions.
struct Minimizer {
  enum class Strategy { kGridGaussNewton, kGrid, kGaussNewton, kNelderMead };

  static constexpr int kMaxGridDim = 3;

  Strategy strategy = Strategy::kGridGaussNewton;
  Vector lower;
  Vector upper;
  int grid_points = 17;
  int starts = 5;
  double tolerance = 1e-8;  // gradient norm
  int max_iterations = 200;

  /// Box [-half_width, half_width]^dim.
  static Minimizer box(int dim, double half_width);
};

struct MinimizeResult {
  Vector argmin;
  double value = 0.0;
  double gradient_norm = 0.0;
  int evaluations = 0;
  /// The budget ran out before the tolerance was met.
  bool degraded = false;
  /// Two distinct local solutions reached (almost) the same value.
  bool near_tie = false;
};

/// Minimizes `objective`. When `residual` is set, objective(x) must equal
/// |residual(x)|^2. `hints` are extra starting points (e.g. a warm start).
/// The returned value never exceeds the value at any probed point.
MinimizeResult minimize(const Objective& objective, const ResidualMap& residual,
                        const std::vector<Vector>& hints, const Minimizer& config);

/// Central finite-difference Jacobian of `residual` at x.
Matrix fd_jacobian(const ResidualMap& residual, const Vector& x,
                   double step_scale = 1e-6);

}  // namespace dualhorizon::optim
