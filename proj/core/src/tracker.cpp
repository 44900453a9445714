#include "dualhorizon/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dualhorizon/errors.hpp"

namespace dualhorizon::nl {

namespace {

bool lexicographic_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

struct Search {
  const TrackerProgram& program;
  const std::vector<Vector>& inputs;
  Vector target;
  std::vector<Vector> states;
  std::vector<int> choice;

  double best_value = std::numeric_limits<double>::infinity();
  std::vector<int> best_choice{};
  int multiplicity = 0;
  long long leaves = 0;
  double nearest_miss = std::numeric_limits<double>::infinity();
  Vector reach_lo{};
  Vector reach_hi{};

  void descend(int depth, double partial) {
    const ControlledSystem& sys = program.system;
    if (depth == program.horizon) {
      ++leaves;
      const Vector& last = states[depth];
      if (reach_lo.size() == 0) {
        reach_lo = last;
        reach_hi = last;
      } else {
        reach_lo = reach_lo.cwiseMin(last);
        reach_hi = reach_hi.cwiseMax(last);
      }
      const double miss = (last - target).norm();
      nearest_miss = std::min(nearest_miss, miss);
      if (miss > program.terminal_tolerance) return;
      const double tie = 1e-12 * (1.0 + std::abs(best_value));
      if (partial < best_value - tie || best_choice.empty()) {
        best_value = partial;
        best_choice = choice;
        multiplicity = 1;
      } else if (std::abs(partial - best_value) <= tie) {
        ++multiplicity;
      }
      return;
    }
    const Vector reference = sys.f(states[depth]);
    for (size_t u = 0; u < inputs.size(); ++u) {
      states[depth + 1] = sys.F(states[depth], inputs[u]);
      choice[depth] = static_cast<int>(u);
      descend(depth + 1, partial + program.cost(states[depth + 1], reference));
    }
  }
};

TrackerSolution solve_exhaustive(const TrackerProgram& program, const Vector& xhat,
                                 const Vector& x) {
  std::vector<Vector> inputs = std::get<FiniteInputSet>(program.system.input_set).inputs;
  if (inputs.empty()) throw ConfigError({"inputs: finite input set is empty"});
  std::sort(inputs.begin(), inputs.end(), lexicographic_less);

  const double total = std::pow(static_cast<double>(inputs.size()), program.horizon);
  if (total > static_cast<double>(program.max_sequences)) {
    throw ConfigError({"N: exhaustive search over " + std::to_string(total) +
                       " input sequences exceeds the limit of " +
                       std::to_string(program.max_sequences)});
  }

  Search search{program, inputs, program.system.f_power(x, program.horizon), {}, {}};
  search.states.resize(program.horizon + 1);
  search.choice.resize(program.horizon);
  search.states[0] = xhat;
  search.descend(0, 0.0);

  if (search.best_choice.empty()) {
    std::ostringstream msg;
    msg << "terminal constraint z_N = f^N(x) unreachable in " << program.horizon
        << " steps: " << search.leaves << " sequences reach states in ["
        << search.reach_lo.transpose() << "] .. [" << search.reach_hi.transpose()
        << "], nearest miss " << search.nearest_miss;
    throw InfeasibleError(msg.str());
  }

  TrackerSolution out;
  out.states.push_back(xhat);
  for (int i = 0; i < program.horizon; ++i) {
    out.inputs.push_back(inputs[search.best_choice[i]]);
    out.states.push_back(program.system.F(out.states.back(), out.inputs.back()));
  }
  out.value = search.best_value;
  out.u0 = out.inputs.front();
  out.terminal_residual = (out.states.back() - search.target).norm();
  out.multiplicity = search.multiplicity;
  return out;
}

struct ShootingResult {
  Vector inputs;
  std::vector<Vector> states;
  double value = 0.0;
  double residual = std::numeric_limits<double>::infinity();
};

ShootingResult shoot(const TrackerProgram& program, const Vector& xhat,
                     const Vector& target, const Vector& start) {
  const ControlledSystem& sys = program.system;
  const int m = sys.input_dim;
  const int n = sys.state_dim;
  const int horizon = program.horizon;
  const auto& box = std::get<BoxInputSet>(sys.input_set);

  const auto clamp = [&](const Vector& w) {
    Vector out = w;
    for (int i = 0; i < horizon; ++i) {
      out.segment(i * m, m) = out.segment(i * m, m).cwiseMax(box.lower).cwiseMin(box.upper);
    }
    return out;
  };
  const auto rollout = [&](const Vector& w) {
    std::vector<Vector> states{xhat};
    const Vector u = clamp(w);
    for (int i = 0; i < horizon; ++i) {
      states.push_back(sys.F(states.back(), u.segment(i * m, m)));
    }
    return states;
  };
  const auto stage_total = [&](const std::vector<Vector>& states) {
    double total = 0.0;
    for (int i = 0; i < horizon; ++i) total += program.cost(states[i + 1], sys.f(states[i]));
    return total;
  };

  Vector multiplier = Vector::Zero(n);
  double penalty = program.initial_penalty;
  Vector w = clamp(start);
  optim::Minimizer inner;
  inner.strategy = program.cost.has_residual() ? optim::Minimizer::Strategy::kGaussNewton
                                               : optim::Minimizer::Strategy::kNelderMead;
  inner.tolerance = 1e-12;
  inner.max_iterations = program.max_iterations;

  for (int round = 0; round < program.continuation_rounds; ++round) {
    // Augmented Lagrangian: l-sum + |sqrt(mu) (c + lambda / (2 mu))|^2.
    const Vector shift = multiplier / (2.0 * penalty);
    const double root_mu = std::sqrt(penalty);
    const optim::Objective objective = [&](const Vector& v) {
      const std::vector<Vector> s = rollout(v);
      return stage_total(s) + penalty * (s.back() - target + shift).squaredNorm();
    };
    optim::ResidualMap residual;
    if (program.cost.has_residual()) {
      residual = [&](const Vector& v) {
        const std::vector<Vector> s = rollout(v);
        std::vector<Vector> parts;
        Eigen::Index size = n;
        for (int i = 0; i < horizon; ++i) {
          parts.push_back(program.cost.residual(s[i + 1], sys.f(s[i])));
          size += parts.back().size();
        }
        Vector r(size);
        Eigen::Index at = 0;
        for (const Vector& part : parts) {
          r.segment(at, part.size()) = part;
          at += part.size();
        }
        r.tail(n) = root_mu * (s.back() - target + shift);
        return r;
      };
    }
    w = optim::minimize(objective, residual, {w}, inner).argmin;
    const Vector violation = rollout(w).back() - target;
    multiplier += 2.0 * penalty * violation;
    if (round + 1 < program.continuation_rounds) penalty *= program.penalty_growth;
  }

  ShootingResult out;
  out.inputs = clamp(w);
  out.states = rollout(w);
  out.value = stage_total(out.states);
  out.residual = (out.states.back() - target).norm();
  return out;
}

TrackerSolution solve_shooting(const TrackerProgram& program, const Vector& xhat,
                               const Vector& x) {
  const ControlledSystem& sys = program.system;
  const Vector target = sys.f_power(x, program.horizon);
  const int size = sys.input_dim * program.horizon;

  ShootingResult first = shoot(program, xhat, target, Vector::Zero(size));
  Vector alt(size);
  for (int i = 0; i < size; ++i) alt(i) = (i % 2 == 0) ? 0.5 : -0.5;
  ShootingResult second = shoot(program, xhat, target, alt);

  const bool first_ok = first.residual <= program.terminal_tolerance;
  const bool second_ok = second.residual <= program.terminal_tolerance;
  if (!first_ok && !second_ok) {
    std::ostringstream msg;
    msg << "terminal constraint z_N = f^N(x) not met by shooting: residual "
        << std::min(first.residual, second.residual) << " > tolerance "
        << program.terminal_tolerance;
    throw InfeasibleError(msg.str());
  }
  int multiplicity = 1;
  if (first_ok && second_ok) {
    const double tie = 1e-8 * (1.0 + std::abs(first.value));
    if (std::abs(first.value - second.value) <= tie &&
        (first.states[1] - second.states[1]).norm() > 1e-4 * (1.0 + first.states[1].norm())) {
      multiplicity = 2;
    }
  }
  const ShootingResult& best =
      (!first_ok || (second_ok && second.value < first.value - 1e-12 * (1.0 + first.value)))
          ? second
          : first;

  TrackerSolution out;
  out.states = best.states;
  for (int i = 0; i < program.horizon; ++i) {
    out.inputs.push_back(best.inputs.segment(i * sys.input_dim, sys.input_dim));
  }
  out.value = best.value;
  out.u0 = out.inputs.front();
  out.terminal_residual = best.residual;
  out.multiplicity = multiplicity;
  return out;
}

}  // namespace

TrackerSolution tracker_solve(const TrackerProgram& program, const Vector& xhat,
                              const Vector& x) {
  const ControlledSystem& sys = program.system;
  if (program.horizon < 1) throw ConfigError({"N: must be >= 1"});
  if (xhat.size() != sys.state_dim || x.size() != sys.state_dim) {
    throw DimensionError("tracker: x̂ or x has the wrong dimension");
  }
  if (program.backend == TrackerProgram::Backend::kExhaustive) {
    if (!sys.is_finite()) {
      throw ConfigError({"backend: exhaustive search needs a finite input set"});
    }
    return solve_exhaustive(program, xhat, x);
  }
  if (sys.is_finite()) {
    throw ConfigError({"backend: shooting needs a box input set"});
  }
  return solve_shooting(program, xhat, x);
}

Trace run_tracker(const TrackerProgram& program, const Vector& xhat0, const Vector& x0,
                  int steps) {
  if (steps < 0) throw ConfigError({"steps: must be >= 0"});
  const ControlledSystem& sys = program.system;
  Trace trace;
  trace.reserve(steps + 1);
  Vector xhat = xhat0;
  Vector x = x0;
  for (int k = 0; k <= steps; ++k) {
    TrackerSolution sol;
    try {
      sol = tracker_solve(program, xhat, x);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("step " + std::to_string(k) + ": " + e.what());
    }
    TraceRecord rec;
    rec.k = k;
    rec.x = x;
    rec.xhat = xhat;
    rec.err_norm = (xhat - x).norm();
    rec.u = sol.u0;
    rec.cost_V = sol.value;
    rec.feasible = sol.terminal_residual <= program.terminal_tolerance;
    if (k > 0) {
      TraceRecord& prev = trace.back();
      prev.lyap_lhs = sol.value - *prev.cost_V;
    }
    // Next step's drop must beat l(phi_1, f x̂).
    rec.lyap_rhs = -program.cost(sol.states[1], sys.f(xhat));
    trace.push_back(std::move(rec));
    xhat = sol.states[1];
    x = sys.f(x);
    require_finite(xhat, "tracker state", k + 1);
    require_finite(x, "reference state", k + 1);
  }
  trace.back().lyap_rhs.reset();
  return trace;
}

bool is_equilibrium(const ControlledSystem& sys, const Vector& x, double tol) {
  return (sys.f(x) - x).norm() <= tol * (1.0 + x.norm());
}

int count_decrease_violations(const Trace& trace, double tol) {
  int count = 0;
  for (const TraceRecord& rec : trace) {
    if (rec.lyap_lhs && rec.lyap_rhs && *rec.lyap_lhs > *rec.lyap_rhs + tol) ++count;
  }
  return count;
}

}  // namespace dualhorizon::nl
