#pragma once

#include "dualhorizon/system_model.hpp"

namespace dualhorizon::mhe {

/// Q = sum_{i=0}^{N-2} A^{iT} C^T R C A^i (zero for N = 1) and
/// H = A^{(N-1)T} C^T R C A^{N-1}.
struct HorizonWeights {
  int horizon = 1;
  Matrix R;
  Matrix Q;
  Matrix H;

  Matrix total() const { return Q + H; }
};

/// Throws ConfigError for a non-symmetric or indefinite R and SynthesisError
/// when the observability stack lacks full column rank.
HorizonWeights horizon_weights(const Matrix& a, const Matrix& c, int horizon,
                               const Matrix& r);

/// Unique minimizer of cost_J(., z, y):
///   eta = (Q+H)^{-1} (A^{(N-1)T} C^T R y + Q z).
Vector optimal_eta(const HorizonWeights& w, const Matrix& a, const Matrix& c,
                   const Vector& z, const Vector& y);

/// ||C A^{N-1} xi - y||_R^2 + sum_{i<N-1} ||C A^i (xi - z)||_R^2
double cost_J(const Matrix& a, const Matrix& c, const Matrix& r, int horizon,
              const Vector& xi, const Vector& z, const Vector& y);

struct ObserverGain {
  Matrix L;
  double spectral_radius = 0.0;  // of A - L C
  Matrix Q;
  Matrix H;
};

/// L = A^N (Q+H)^{-1} A^{(N-1)T} C^T R, the gain of the equivalent
/// x̂+ = A x̂ + L (y - C x̂) observer.
ObserverGain observer_gain(const Matrix& a, const Matrix& c, int horizon,
                           const Matrix& r);

/// The three quadratic terms of the cost-decomposition identity
///   J(eta, z, y) + |eta - x̃|^2_{Q+H} = |z - x̃|^2_Q,   y = C A^{N-1} x̃.
struct CostDecomposition {
  double cost = 0.0;
  double descent = 0.0;
  double prior = 0.0;

  double residual() const { return cost + descent - prior; }
  double scale() const { return 1.0 + std::abs(cost) + std::abs(descent) + std::abs(prior); }
};

CostDecomposition cost_decomposition(const HorizonWeights& w, const Matrix& a,
                                     const Matrix& c, const Vector& z,
                                     const Vector& x_delayed);

/// Absolute residual of the identity above.
double decomposition_residual(const HorizonWeights& w, const Matrix& a,
                       const Matrix& c, const Vector& z, const Vector& x_delayed);

/// max |Q (Q+H)^{-1} H - H (Q+H)^{-1} Q|.
double symmetry_residual(const HorizonWeights& w);

/// |J(eta,z,y) - (z-x̃)^T H (Q+H)^{-1} Q (z-x̃)| divided by 1 + |J| + |rhs|.
double closed_form_cost_residual(const HorizonWeights& w, const Matrix& a,
                                 const Matrix& c, const Vector& z,
                                 const Vector& x_delayed);

/// |(eta-x̃)^T (Q+H) (eta-x̃) - (z-x̃)^T Q (Q+H)^{-1} Q (z-x̃)|, relative.
double descent_form_residual(const HorizonWeights& w, const Matrix& a,
                             const Matrix& c, const Vector& z,
                             const Vector& x_delayed);

struct LyapunovStep {
  double lhs = 0.0;  // |z+ - x̃+|^2_Q with z+ = A eta, x̃+ = A x̃
  double rhs = 0.0;  // |z - x̃|^2_Q - J(eta, z, y)
};

LyapunovStep lyap_decrement(const HorizonWeights& w, const Matrix& a,
                            const Matrix& c, const Vector& z,
                            const Vector& x_delayed);

/// Largest cost level that still forces ||x̂ - x|| <= eps N steps later:
///   6 lmin(W^T W) lmin(R) eps^2 / ((2N^3 + 3N^2 + N) lmax(A^{NT} A^N)).
/// Returns +inf when A^N = 0.
double claim_delta(int horizon, const Matrix& w_stack, const Matrix& a,
                   const Matrix& r, double eps);

/// Runs z+ = A eta, x̂ = A^{N-1} z against x+ = A x for `steps` updates
/// (steps + 1 records). Records from k = N-1 on carry x̃ = x_{k-N+1} and the
/// Lyapunov/identity diagnostics.
Trace run(const Matrix& a, const Matrix& c, int horizon, const Matrix& r,
          const Vector& z0, const Vector& x0, int steps);

/// Reference run of x̂+ = A x̂ + L (y - C x̂) with a precomputed gain.
Trace run_gain_form(const Matrix& a, const Matrix& c, const Matrix& gain,
                    const Vector& xhat0, const Vector& x0, int steps);

}  // namespace dualhorizon::mhe
