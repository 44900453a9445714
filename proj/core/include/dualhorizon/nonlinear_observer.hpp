#pragma once

#include <cstdint>

#include "dualhorizon/minimizer.hpp"
#include "dualhorizon/stage_cost.hpp"
#include "dualhorizon/system_model.hpp"

namespace dualhorizon::nl {

/// J(xi, z, y) = l(h f^{N-1} xi, y) + sum_{i<N-1} l(h f^i xi, h f^i z).
double cost_J(const NonlinearSystem& sys, const StageCost& cost, int horizon,
              const Vector& xi, const Vector& z, const Vector& y);

struct EtaResult {
  Vector eta;
  double cost = 0.0;
  bool degraded = false;
  bool near_tie = false;
};

/// eta = argmin_xi J(xi, z, y). z is always included as a start.
EtaResult optimal_eta(const NonlinearSystem& sys, const StageCost& cost,
                      int horizon, const Vector& z, const Vector& y,
                      const optim::Minimizer& minimizer);

/// z+ = f(eta), x̂ = f^{N-1}(z) against x+ = f(x); steps + 1 records.
/// `feasible` is false on records whose minimization was degraded.
Trace run_observer(const NonlinearSystem& sys, const StageCost& cost,
                   int horizon, const Vector& z0, const Vector& x0, int steps,
                   const optim::Minimizer& minimizer);

/// sum_{k >= k0} alpha4(J_k) against the window discrepancy
/// sum_{i<N-1} l(h f^i z_{k0}, h f^i x̃_{k0}) at k0 = N-1.
struct JSumCheck {
  double weighted_sum = 0.0;
  double bound = 0.0;
  bool holds(double slack = 1e-9) const { return weighted_sum <= bound + slack; }
};

JSumCheck check_jsum_bound(const NonlinearSystem& sys, const StageCost& cost,
                           int horizon, const Trace& trace,
                           const ClassKFunction& alpha4);

/// Uniform sampling of (z, x̃) pairs in a box, with the candidate
/// class-K-infinity function under test.
struct SampleSpec {
  Vector lower;
  Vector upper;
  int samples = 200;
  std::uint64_t seed = 1;
  ClassKFunction alpha;
};

struct ObservabilityReport {
  int samples = 0;
  int vacuous = 0;  // z == x̃
  int violations = 0;
  double min_ratio = 0.0;  // min sum l / alpha3(|z - x̃|) over non-vacuous samples
};

/// sum_{i<N} l(h f^i z, h f^i x̃) >= alpha3(|z - x̃|) on samples.
ObservabilityReport check_uniform_observability(const NonlinearSystem& sys,
                                                const StageCost& cost,
                                                int horizon,
                                                const SampleSpec& spec);

struct DecayReport {
  int samples = 0;
  int violations = 0;
  double max_excess = 0.0;  // largest positive excess, 0 when none
};

/// alpha4(J(eta, z, h f^{N-1} x̃)) + sum_{i<N} l(h f^i eta, h f^i x̃)
///   - sum_{i<N-1} l(h f^i z, h f^i x̃) <= 0 on samples. Never throws on
/// violations.
DecayReport check_J_decay(const NonlinearSystem& sys, const StageCost& cost,
                          int horizon, const SampleSpec& spec,
                          const optim::Minimizer& minimizer,
                          double violation_tol = 1e-9);

}  // namespace dualhorizon::nl
