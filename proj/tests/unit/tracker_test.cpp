#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "dualhorizon/errors.hpp"
#include "dualhorizon/min_energy.hpp"
#include "dualhorizon/random_systems.hpp"
#include "dualhorizon/registry.hpp"
#include "dualhorizon/stage_cost.hpp"
#include "dualhorizon/tracker.hpp"
#include "oracles.hpp"

namespace dh = dualhorizon;
namespace nl = dualhorizon::nl;
using dh::Matrix;
using dh::Vector;

namespace {

Vector v1(double v) { return Vector::Constant(1, v); }

nl::TrackerProgram integer_walk(int horizon) {
  nl::TrackerProgram p;
  p.system = dh::registry::make_controlled("integer_walk");
  p.cost = nl::absolute(1);
  p.horizon = horizon;
  return p;
}

std::vector<Vector> sorted_inputs(const dh::ControlledSystem& sys) {
  std::vector<Vector> in = std::get<dh::FiniteInputSet>(sys.input_set).inputs;
  std::sort(in.begin(), in.end(), [](const Vector& a, const Vector& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                        b.data() + b.size());
  });
  return in;
}

oracle::Enumeration enumerate_program(const nl::TrackerProgram& p, const Vector& xhat,
                                      const Vector& x) {
  const std::vector<Vector> inputs = sorted_inputs(p.system);
  const Vector target = p.system.f_power(x, p.horizon);
  return oracle::enumerate(
      p.horizon, static_cast<int>(inputs.size()),
      [&](const std::vector<int>& seq, bool& feasible) {
        Vector z = xhat;
        double total = 0.0;
        for (int idx : seq) {
          const Vector next = p.system.F(z, inputs[idx]);
          total += p.cost(next, p.system.f(z));
          z = next;
        }
        feasible = (z - target).norm() <= p.terminal_tolerance;
        return total;
      });
}

// Planar plant with a five-letter alphabet and a twisted reference map.
dh::ControlledSystem planar_finite() {
  dh::ControlledSystem sys;
  sys.name = "planar_finite";
  sys.state_dim = 2;
  sys.input_dim = 2;
  sys.reference_map = [](const Vector& x) {
    return (Vector(2) << x(1), x(0)).finished();
  };
  sys.transition = [](const Vector& z, const Vector& u) {
    return (Vector(2) << z(1) + u(0), z(0) + u(1)).finished();
  };
  std::vector<Vector> u;
  for (auto [a, b] : {std::pair{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
    u.push_back((Vector(2) << a, b).finished());
  }
  sys.input_set = dh::FiniteInputSet{u};
  return sys;
}

}  // namespace

TEST(TrackerSolve, IntegerWalkPath) {
  const nl::TrackerSolution sol = nl::tracker_solve(integer_walk(2), v1(2.0), v1(0.0));
  ASSERT_EQ(sol.states.size(), 3u);
  EXPECT_EQ(sol.states[0](0), 2.0);
  EXPECT_EQ(sol.states[1](0), 1.0);
  EXPECT_EQ(sol.states[2](0), 0.0);
  EXPECT_EQ(sol.value, 2.0);
  EXPECT_EQ(sol.u0(0), -1.0);
  EXPECT_EQ(sol.multiplicity, 1);
}

TEST(TrackerSolve, IntegerWalkInfeasible) {
  EXPECT_THROW(nl::tracker_solve(integer_walk(2), v1(3.0), v1(0.0)), dh::InfeasibleError);
}

TEST(TrackerSolve, FixedPointHasZeroCost) {
  const nl::TrackerSolution sol = nl::tracker_solve(integer_walk(3), v1(0.0), v1(0.0));
  EXPECT_EQ(sol.value, 0.0);
  for (const Vector& z : sol.states) EXPECT_EQ(z(0), 0.0);
  EXPECT_TRUE(nl::is_equilibrium(integer_walk(3).system, v1(0.0)));
}

TEST(TrackerSolve, TieBreakIsLexicographic) {
  // From 1 to 0 in 3 steps: -1 can be spent at any step; costs are equal.
  const nl::TrackerSolution sol = nl::tracker_solve(integer_walk(3), v1(1.0), v1(0.0));
  EXPECT_EQ(sol.multiplicity, 3);
  EXPECT_EQ(sol.inputs[0](0), -1.0);
  EXPECT_EQ(sol.inputs[1](0), 0.0);
}

TEST(TrackerSolve, ExhaustiveMatchesEnumerationOnIntegerWalk) {
  dh::random::Engine rng(61);
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int horizon = 1 + trial % 8;
    const nl::TrackerProgram p = integer_walk(horizon);
    const Vector xhat = v1(std::round(dh::random::uniform(rng, -6, 6)));
    const Vector x = v1(std::round(dh::random::uniform(rng, -6, 6)));
    const oracle::Enumeration ref = enumerate_program(p, xhat, x);
    if (ref.argmin.empty()) {
      EXPECT_THROW(nl::tracker_solve(p, xhat, x), dh::InfeasibleError);
      continue;
    }
    const nl::TrackerSolution sol = nl::tracker_solve(p, xhat, x);
    EXPECT_EQ(sol.value, ref.best);
    EXPECT_EQ(sol.multiplicity, ref.optimal_count);
    const std::vector<Vector> inputs = sorted_inputs(p.system);
    for (int i = 0; i < horizon; ++i) EXPECT_EQ(sol.inputs[i], inputs[ref.argmin[i]]);
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(TrackerSolve, ExhaustiveMatchesEnumerationOnPlanarPlant) {
  dh::random::Engine rng(62);
  for (int trial = 0; trial < 40; ++trial) {
    nl::TrackerProgram p;
    p.system = planar_finite();
    p.cost = trial % 2 ? nl::quadratic((Matrix(2, 2) << 2, 0.5, 0.5, 1).finished())
                       : nl::absolute(2);
    p.horizon = 1 + trial % 6;  // 5^6 = 15625 sequences at most
    const Vector xhat = dh::random::uniform_vector(rng, 2, -3, 3).array().round();
    const Vector x = dh::random::uniform_vector(rng, 2, -3, 3).array().round();
    const oracle::Enumeration ref = enumerate_program(p, xhat, x);
    if (ref.argmin.empty()) {
      EXPECT_THROW(nl::tracker_solve(p, xhat, x), dh::InfeasibleError);
      continue;
    }
    const nl::TrackerSolution sol = nl::tracker_solve(p, xhat, x);
    EXPECT_EQ(sol.value, ref.best);
    EXPECT_EQ(sol.multiplicity, ref.optimal_count);
    const std::vector<Vector> inputs = sorted_inputs(p.system);
    for (int i = 0; i < p.horizon; ++i) EXPECT_EQ(sol.inputs[i], inputs[ref.argmin[i]]);
  }
}

TEST(TrackerSolve, RefusesOversizedSearch) {
  nl::TrackerProgram p = integer_walk(12);
  p.max_sequences = 1000;
  EXPECT_THROW(nl::tracker_solve(p, v1(0.0), v1(0.0)), dh::ConfigError);
}

TEST(TrackerSolve, ShootingMatchesMinimumEnergyOnLinearPlant) {
  dh::random::Engine rng(63);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 2;
    const int m = 1 + trial % 2;
    const int horizon = n + 1;
    const dh::LinearSystem sys = dh::random::controllable_system(rng, n, m, horizon);
    const Matrix r = dh::random::spd_matrix(rng, m);
    nl::TrackerProgram p;
    p.system = dh::registry::make_linear_controlled(sys);
    p.cost = nl::quadratic(dh::min_energy::tracker_stage_weight(sys.B(), r));
    p.horizon = horizon;
    p.backend = nl::TrackerProgram::Backend::kShooting;
    const Vector xhat = dh::random::uniform_vector(rng, n);
    const Vector x = dh::random::uniform_vector(rng, n);
    const nl::TrackerSolution sol = nl::tracker_solve(p, xhat, x);
    const double v = dh::min_energy::optimal_cost_V(sys.A(), sys.B(), horizon, r, xhat, x);
    const Matrix k = dh::min_energy::kleinman_gain(sys.A(), sys.B(), horizon, r);
    EXPECT_NEAR(sol.value, v, 1e-6 * (1 + v));
    EXPECT_LT((sol.u0 - k * (x - xhat)).norm(), 1e-6);
    EXPECT_LE(sol.terminal_residual, 1e-6);
  }
}

TEST(RunTracker, IntegerWalkFromFiveDropsByOnePerStep) {
  const dh::Trace trace = nl::run_tracker(integer_walk(5), v1(5.0), v1(0.0), 8);
  ASSERT_EQ(trace.size(), 9u);
  for (size_t k = 1; k < trace.size(); ++k) {
    if (trace[k - 1].err_norm > 0) {
      EXPECT_LE(trace[k].err_norm, trace[k - 1].err_norm - 1.0);
    } else {
      EXPECT_EQ(trace[k].err_norm, 0.0);
    }
  }
  EXPECT_EQ(nl::count_decrease_violations(trace), 0);
}

TEST(RunTracker, IntegerWalkFromFiveWithShortHorizonIsInfeasible) {
  EXPECT_THROW(nl::run_tracker(integer_walk(2), v1(5.0), v1(0.0), 5), dh::InfeasibleError);
}

TEST(RunTracker, MatchedStartHasZeroCost) {
  const dh::Trace trace = nl::run_tracker(integer_walk(2), v1(0.0), v1(0.0), 5);
  for (const auto& rec : trace) EXPECT_EQ(*rec.cost_V, 0.0);
}

TEST(RunTracker, LinearPlantFollowsClosedFormCost) {
  const Matrix a = (Matrix(2, 2) << 1.1, 0.3, -0.2, 0.8).finished();
  const Matrix b = (Matrix(2, 1) << 0.0, 1.0).finished();
  const Matrix r = Matrix::Identity(1, 1);
  const dh::LinearSystem sys(a, b);
  nl::TrackerProgram p;
  p.system = dh::registry::make_linear_controlled(sys);
  p.cost = nl::quadratic(dh::min_energy::tracker_stage_weight(b, r));
  p.horizon = 3;
  p.backend = nl::TrackerProgram::Backend::kShooting;
  const Vector xhat0 = (Vector(2) << 1.0, -1.0).finished();
  const Vector x0 = (Vector(2) << 0.2, 0.4).finished();
  const dh::Trace trace = nl::run_tracker(p, xhat0, x0, 10);
  for (const auto& rec : trace) {
    const double v = dh::min_energy::optimal_cost_V(a, b, 3, r, rec.xhat, rec.x);
    EXPECT_NEAR(*rec.cost_V, v, 1e-6 * (1 + v));
  }
  EXPECT_EQ(nl::count_decrease_violations(trace), 0);
}

TEST(RunTracker, ContinuousNonlinearPlantDecreases) {
  nl::TrackerProgram p;
  p.system = dh::registry::make_controlled("additive_sine");
  p.cost = nl::quadratic(Matrix::Identity(1, 1));
  p.horizon = 3;
  p.backend = nl::TrackerProgram::Backend::kShooting;
  const dh::Trace trace = nl::run_tracker(p, v1(2.0), v1(-1.0), 60);
  EXPECT_EQ(nl::count_decrease_violations(trace), 0);
  EXPECT_LT(trace.back().err_norm, 1e-6);
}
