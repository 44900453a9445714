#include "dualhorizon/nonlinear_observer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualhorizon/errors.hpp"
#include "dualhorizon/random_systems.hpp"

namespace dualhorizon::nl {

namespace {

/// h f^i v for i = 0..count-1.
std::vector<Vector> output_window(const NonlinearSystem& sys, const Vector& v,
                                  int count) {
  std::vector<Vector> out;
  out.reserve(count);
  Vector s = v;
  for (int i = 0; i < count; ++i) {
    out.push_back(sys.h(s));
    if (i + 1 < count) s = sys.f(s);
  }
  return out;
}

double window_cost(const StageCost& cost, const std::vector<Vector>& a,
                   const std::vector<Vector>& b, int count) {
  double total = 0.0;
  for (int i = 0; i < count; ++i) total += cost(a[i], b[i]);
  return total;
}

void require_dims(const NonlinearSystem& sys, const Vector& z, const Vector& y) {
  if (z.size() != sys.state_dim || y.size() != sys.output_dim) {
    throw DimensionError("nonlinear observer: state or output has the wrong dimension");
  }
}

Vector draw(random::Engine& rng, const Vector& lower, const Vector& upper) {
  Vector v(lower.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = random::uniform(rng, lower(i), upper(i));
  return v;
}

}  // namespace

double cost_J(const NonlinearSystem& sys, const StageCost& cost, int horizon,
              const Vector& xi, const Vector& z, const Vector& y) {
  if (horizon < 1) throw DimensionError("horizon N must be >= 1");
  require_dims(sys, z, y);
  const std::vector<Vector> hx = output_window(sys, xi, horizon);
  const std::vector<Vector> hz = output_window(sys, z, horizon - 1);
  const double total = window_cost(cost, hx, hz, horizon - 1) + cost(hx.back(), y);
  if (!std::isfinite(total)) throw DivergenceError("cost J is not finite");
  return total;
}

EtaResult optimal_eta(const NonlinearSystem& sys, const StageCost& cost, int horizon,
                      const Vector& z, const Vector& y,
                      const optim::Minimizer& minimizer) {
  if (horizon < 1) throw DimensionError("horizon N must be >= 1");
  require_dims(sys, z, y);
  const std::vector<Vector> hz = output_window(sys, z, horizon - 1);

  const optim::Objective objective = [&](const Vector& xi) {
    const std::vector<Vector> hx = output_window(sys, xi, horizon);
    return window_cost(cost, hx, hz, horizon - 1) + cost(hx.back(), y);
  };
  optim::ResidualMap residual;
  if (cost.has_residual()) {
    residual = [&](const Vector& xi) {
      const std::vector<Vector> hx = output_window(sys, xi, horizon);
      std::vector<Vector> parts;
      Eigen::Index total = 0;
      for (int i = 0; i < horizon; ++i) {
        parts.push_back(cost.residual(hx[i], i + 1 < horizon ? hz[i] : y));
        total += parts.back().size();
      }
      Vector r(total);
      Eigen::Index at = 0;
      for (const Vector& part : parts) {
        r.segment(at, part.size()) = part;
        at += part.size();
      }
      return r;
    };
  }
  const optim::MinimizeResult res = optim::minimize(objective, residual, {z}, minimizer);
  return {res.argmin, res.value, res.degraded, res.near_tie};
}

Trace run_observer(const NonlinearSystem& sys, const StageCost& cost, int horizon,
                   const Vector& z0, const Vector& x0, int steps,
                   const optim::Minimizer& minimizer) {
  if (horizon < 1) throw DimensionError("horizon N must be >= 1");
  if (steps < 0) throw ConfigError({"steps: must be >= 0"});
  if (z0.size() != sys.state_dim) throw DimensionError("z0 has the wrong dimension");
  const std::vector<Vector> xs = iterate_autonomous(sys, x0, steps);
  Trace trace;
  trace.reserve(steps + 1);
  Vector z = z0;
  for (int k = 0; k <= steps; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.x = xs[k];
    rec.y = sys.h(xs[k]);
    rec.z = z;
    rec.xhat = sys.f_power(z, horizon - 1);
    require_finite(rec.xhat, "estimate", k);
    rec.err_norm = (rec.xhat - rec.x).norm();
    if (k >= horizon - 1) rec.x_delayed = xs[k - horizon + 1];
    const EtaResult eta = optimal_eta(sys, cost, horizon, z, *rec.y, minimizer);
    require_finite(eta.eta, "eta", k);
    rec.eta = eta.eta;
    rec.cost_J = eta.cost;
    rec.feasible = !eta.degraded;
    z = sys.f(eta.eta);
    trace.push_back(std::move(rec));
  }
  return trace;
}

JSumCheck check_jsum_bound(const NonlinearSystem& sys, const StageCost& cost,
                           int horizon, const Trace& trace,
                           const ClassKFunction& alpha4) {
  const int k0 = horizon - 1;
  if (static_cast<int>(trace.size()) <= k0 || !trace[k0].z || !trace[k0].x_delayed) {
    throw DimensionError("check_jsum_bound: trace too short for the horizon");
  }
  JSumCheck out;
  const std::vector<Vector> hz = output_window(sys, *trace[k0].z, horizon - 1);
  const std::vector<Vector> hx = output_window(sys, *trace[k0].x_delayed, horizon - 1);
  out.bound = window_cost(cost, hz, hx, horizon - 1);
  for (size_t k = static_cast<size_t>(k0); k < trace.size(); ++k) {
    if (trace[k].cost_J) out.weighted_sum += alpha4(*trace[k].cost_J);
  }
  return out;
}

ObservabilityReport check_uniform_observability(const NonlinearSystem& sys,
                                                const StageCost& cost, int horizon,
                                                const SampleSpec& spec) {
  if (spec.lower.size() != sys.state_dim || spec.upper.size() != sys.state_dim) {
    throw DimensionError("sample box has the wrong dimension");
  }
  if (!spec.alpha) throw ConfigError({"alpha: candidate function missing"});
  ObservabilityReport out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  random::Engine rng(spec.seed);
  for (int s = 0; s < spec.samples; ++s) {
    const Vector z = draw(rng, spec.lower, spec.upper);
    const Vector tx = draw(rng, spec.lower, spec.upper);
    ++out.samples;
    const double dist = (z - tx).norm();
    const double bound = spec.alpha(dist);
    if (dist == 0.0 || bound == 0.0) {
      ++out.vacuous;
      continue;
    }
    const double total = window_cost(cost, output_window(sys, z, horizon),
                                     output_window(sys, tx, horizon), horizon);
    const double ratio = total / bound;
    out.min_ratio = std::min(out.min_ratio, ratio);
    if (ratio < 1.0) ++out.violations;
  }
  return out;
}

DecayReport check_J_decay(const NonlinearSystem& sys, const StageCost& cost,
                          int horizon, const SampleSpec& spec,
                          const optim::Minimizer& minimizer, double violation_tol) {
  if (spec.lower.size() != sys.state_dim || spec.upper.size() != sys.state_dim) {
    throw DimensionError("sample box has the wrong dimension");
  }
  if (!spec.alpha) throw ConfigError({"alpha: candidate function missing"});
  DecayReport out;
  random::Engine rng(spec.seed);
  for (int s = 0; s < spec.samples; ++s) {
    const Vector z = draw(rng, spec.lower, spec.upper);
    const Vector tx = draw(rng, spec.lower, spec.upper);
    ++out.samples;
    const std::vector<Vector> htx = output_window(sys, tx, horizon);
    const EtaResult eta = optimal_eta(sys, cost, horizon, z, htx.back(), minimizer);
    const double after =
        window_cost(cost, output_window(sys, eta.eta, horizon), htx, horizon);
    const double before =
        window_cost(cost, output_window(sys, z, horizon - 1), htx, horizon - 1);
    const double excess = spec.alpha(eta.cost) + after - before;
    if (std::isfinite(excess) && excess > out.max_excess) out.max_excess = excess;
    if (!std::isfinite(excess) || excess > violation_tol) ++out.violations;
  }
  return out;
}

}  // namespace dualhorizon::nl
