#pragma once

#include <vector>

#include "dualhorizon/minimizer.hpp"
#include "dualhorizon/stage_cost.hpp"
#include "dualhorizon/system_model.hpp"

namespace dualhorizon::nl {

/// min sum_{i<N} l(z_{i+1}, f z_i)  s.t.  z_0 = x̂, z_{i+1} in F(z_i, U),
/// z_N = f^N x.
struct TrackerProgram {
  enum class Backend { kExhaustive, kShooting };

  ControlledSystem system;
  StageCost cost;
  int horizon = 1;
  Backend backend = Backend::kExhaustive;
  double terminal_tolerance = 1e-6;
  /// Shooting: quadratic terminal penalty, grown by penalty_growth per round.
  int continuation_rounds = 6;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  int max_iterations = 200;
  /// Exhaustive: refuse programs with more input sequences than this.
  long long max_sequences = 10'000'000;
};

struct TrackerSolution {
  std::vector<Vector> states;  // phi_0 .. phi_N
  std::vector<Vector> inputs;  // u_0 .. u_{N-1}
  double value = 0.0;          // V(x̂, x)
  Vector u0;
  double terminal_residual = 0.0;
  /// Number of optimal sequences found (exhaustive) or 2 when a second start
  /// reached the same value along a different path (shooting).
  int multiplicity = 1;
};

/// Solves the program. Exhaustive search breaks ties towards the
/// lexicographically smallest input sequence. Throws InfeasibleError when the
/// terminal state cannot be reached.
TrackerSolution tracker_solve(const TrackerProgram& program, const Vector& xhat,
                              const Vector& x);

/// x̂+ = phi_1(x̂, x), x+ = f(x); steps + 1 records. Each record stores V_k
/// in cost_V and, for k < steps, lyap_lhs = V_{k+1} - V_k and
/// lyap_rhs = -l(phi_1, f x̂_k).
Trace run_tracker(const TrackerProgram& program, const Vector& xhat0,
                  const Vector& x0, int steps);

/// True when x is a fixed point of the reference map (equilibrium
/// regulation; no boundedness hypothesis needed).
bool is_equilibrium(const ControlledSystem& sys, const Vector& x,
                    double tol = 1e-12);

/// Number of records violating V_{k+1} - V_k <= -l(phi_1, f x̂_k) + tol.
int count_decrease_violations(const Trace& trace, double tol = 1e-8);

}  // namespace dualhorizon::nl
