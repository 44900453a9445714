#pragma once

#include <vector>

#include "dualhorizon/system_model.hpp"

namespace dualhorizon::min_energy {

/// G = sum_{i=0}^{N-1} A^i B R B^T A^{iT}. Throws SynthesisError when the
/// controllability stack lacks full row rank, ConfigError for a bad R.
Matrix weighted_gramian(const Matrix& a, const Matrix& b, int horizon,
                        const Matrix& r);

/// K = R B^T A^{(N-1)T} G^{-1} A^N.
Matrix kleinman_gain(const Matrix& a, const Matrix& b, int horizon,
                     const Matrix& r);

struct Solution {
  std::vector<Vector> inputs;  // v_0 .. v_{N-1}
  std::vector<Vector> states;  // z_0 .. z_N
  double cost = 0.0;           // sum v_i^T R^{-1} v_i
  Matrix gain;                 // K
  double terminal_residual = 0.0;  // ||z_N - A^N x||
};

/// Least-energy input sequence steering z_0 = x̂ to z_N = A^N x:
///   v_i = R B^T A^{(N-1-i)T} G^{-1} A^N (x - x̂).
Solution solve(const Matrix& a, const Matrix& b, int horizon, const Matrix& r,
               const Vector& xhat, const Vector& x);

/// V(x̂, x) = (x̂ - x)^T A^{NT} G^{-1} A^N (x̂ - x).
double optimal_cost_V(const Matrix& a, const Matrix& b, int horizon,
                      const Matrix& r, const Vector& xhat, const Vector& x);

/// Q = B (B^T B)^{-1} R^{-1} (B^T B)^{-1} B^T, so that |B v|^2_Q = v^T R^{-1} v.
/// Throws SynthesisError unless B has full column rank.
Matrix tracker_stage_weight(const Matrix& b, const Matrix& r);

/// V is positive definite in x̂ - x only for nonsingular A.
bool cost_is_definite(const Matrix& a);

/// Applies u = v_0(x̂, x) = K (x - x̂) each step (steps + 1 records). Records
/// carry V_k; for k < steps, lyap_lhs = V_{k+1} - V_k and
/// lyap_rhs = -u_k^T R^{-1} u_k.
Trace run_tracker(const Matrix& a, const Matrix& b, int horizon,
                  const Matrix& r, const Vector& xhat0, const Vector& x0,
                  int steps);

enum class Direction { kControlToEstimation, kEstimationToControl };
enum class GainFamily { kOptimal, kDeadbeat };

/// Synthesizes the gain of the dual problem. For control-to-estimation the
/// argument is B and the result is the observer gain of (A^T, B^T); for
/// estimation-to-control it is C and the result is the tracker gain of
/// (A^T, C^T). N and R are ignored for the deadbeat family.
Matrix dualize(const Matrix& a, const Matrix& b_or_c, int horizon,
               const Matrix& r, Direction direction,
               GainFamily family = GainFamily::kOptimal);

/// A gain synthesis problem together with its gain. dual() applies
/// (A, B, K) <-> (A^T, C = B^T, L = K^T) and is an involution.
struct GainProblem {
  enum class Kind { kControl, kEstimation };

  Kind kind = Kind::kControl;
  Matrix A;
  Matrix coupling;  // B for control, C for estimation
  int horizon = 1;
  Matrix R;
  Matrix gain;

  GainProblem dual() const;
  /// Recomputes `gain` from the problem data.
  Matrix synthesize(GainFamily family = GainFamily::kOptimal) const;
};

}  // namespace dualhorizon::min_energy
