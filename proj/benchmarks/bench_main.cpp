#include <benchmark/benchmark.h>

#include "dualhorizon/linear_mhe.hpp"
#include "dualhorizon/min_energy.hpp"
#include "dualhorizon/nonlinear_observer.hpp"
#include "dualhorizon/random_systems.hpp"
#include "dualhorizon/registry.hpp"
#include "dualhorizon/stage_cost.hpp"
#include "dualhorizon/tracker.hpp"

namespace dh = dualhorizon;

static void BM_ObserverGain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  dh::random::Engine rng(7);
  const dh::LinearSystem sys = dh::random::observable_system(rng, n, 1, n + 2);
  const dh::Matrix r = dh::Matrix::Identity(1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dh::mhe::observer_gain(sys.A(), sys.C(), n + 2, r));
  }
}
BENCHMARK(BM_ObserverGain)->Arg(2)->Arg(4)->Arg(8);

static void BM_KleinmanGain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  dh::random::Engine rng(8);
  const dh::LinearSystem sys = dh::random::controllable_system(rng, n, 1, n + 2);
  const dh::Matrix r = dh::Matrix::Identity(1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dh::min_energy::kleinman_gain(sys.A(), sys.B(), n + 2, r));
  }
}
BENCHMARK(BM_KleinmanGain)->Arg(2)->Arg(4)->Arg(8);

// One observer update on the cubic-output system: a bounded minimization of J.
static void BM_NonlinearObserverStep(benchmark::State& state) {
  const dh::NonlinearSystem sys = dh::registry::make_nonlinear("cubic_output");
  const auto cost = dh::nl::quadratic(dh::Matrix::Identity(1, 1));
  const auto box = dh::optim::Minimizer::box(1, 4.0);
  const dh::Vector z0 = dh::Vector::Constant(1, -1.0);
  const dh::Vector x0 = dh::Vector::Constant(1, 1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dh::nl::run_observer(sys, cost, 2, z0, x0, 1, box));
  }
}
BENCHMARK(BM_NonlinearObserverStep);

static void BM_ExhaustiveTracker(benchmark::State& state) {
  dh::nl::TrackerProgram program;
  program.system = dh::registry::make_controlled("integer_walk");
  program.cost = dh::nl::absolute(1);
  program.horizon = static_cast<int>(state.range(0));
  const dh::Vector xhat = dh::Vector::Constant(1, 3.0);
  const dh::Vector x = dh::Vector::Constant(1, 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dh::nl::tracker_solve(program, xhat, x));
  }
}
BENCHMARK(BM_ExhaustiveTracker)->Arg(4)->Arg(6)->Arg(8);

BENCHMARK_MAIN();
