#include "dualhorizon/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dualhorizon/errors.hpp"

namespace dualhorizon::optim {

namespace {

struct LocalResult {
  Vector x;
  double value = std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
};

/// Keeps the best point seen over all objective evaluations.
class Tracker {
 public:
  explicit Tracker(const Objective& objective) : objective_(objective) {}

  double operator()(const Vector& x) {
    ++evaluations;
    const double v = objective_(x);
    if (std::isfinite(v) && v < best_value) {
      best_value = v;
      best = x;
    }
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  int evaluations = 0;
  double best_value = std::numeric_limits<double>::infinity();
  Vector best;

 private:
  const Objective& objective_;
};

LocalResult levenberg_marquardt(const ResidualMap& residual, Tracker& track,
                                const Vector& start, const Minimizer& cfg) {
  LocalResult out;
  Vector x = start;
  Vector r = residual(x);
  double f = r.squaredNorm();
  track(x);
  double lambda = 1e-3;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    if (!std::isfinite(f)) break;
    const Matrix jac = fd_jacobian(residual, x);
    const Vector g = jac.transpose() * r;
    out.gradient_norm = 2.0 * g.norm();
    if (out.gradient_norm <= cfg.tolerance || f == 0.0) {
      out.converged = true;
      break;
    }
    const Matrix normal = jac.transpose() * jac;
    const Vector diag = normal.diagonal().cwiseMax(1e-12);
    bool improved = false;
    while (lambda < 1e14) {
      Matrix damped = normal;
      damped.diagonal() += lambda * diag;
      const Vector step = damped.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 4.0;
        continue;
      }
      const Vector cand = x + step;
      const Vector rc = residual(cand);
      const double fc = rc.squaredNorm();
      track(cand);
      if (std::isfinite(fc) && fc < f) {
        const bool tiny = step.norm() <= 1e-15 * (1.0 + x.norm());
        x = cand;
        r = rc;
        f = fc;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = !tiny;
        break;
      }
      if (step.norm() <= 1e-15 * (1.0 + x.norm())) break;
      lambda *= 4.0;
    }
    if (!improved) {
      // No further decrease is representable; accept as converged only when
      // the gradient is small relative to the residual scale.
      out.converged = out.gradient_norm <= cfg.tolerance * (1.0 + std::sqrt(f));
      break;
    }
  }
  if (!out.converged) {
    const Matrix jac = fd_jacobian(residual, x);
    out.gradient_norm = 2.0 * (jac.transpose() * r).norm();
    out.converged = out.gradient_norm <= cfg.tolerance;
  }
  out.x = x;
  out.value = f;
  return out;
}

LocalResult nelder_mead(Tracker& track, const Vector& start, const Minimizer& cfg) {
  const Eigen::Index n = start.size();
  std::vector<Vector> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double step = 0.1 * (1.0 + std::abs(start(i)));
    if (cfg.lower.size() == n && std::isfinite(cfg.upper(i) - cfg.lower(i))) {
      step = std::max(step, 0.05 * (cfg.upper(i) - cfg.lower(i)));
    }
    simplex[i + 1](i) += step;
  }
  for (size_t i = 0; i < simplex.size(); ++i) values[i] = track(simplex[i]);

  std::vector<size_t> order(n + 1);
  LocalResult out;
  const int budget = cfg.max_iterations * 20 * static_cast<int>(std::max<Eigen::Index>(n, 1));
  for (int iter = 0; iter < budget; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    const size_t best = order.front();
    const size_t worst = order.back();
    const size_t second = order[n >= 1 ? n - 1 : 0];

    double size = 0.0;
    for (const Vector& v : simplex) size = std::max(size, (v - simplex[best]).cwiseAbs().maxCoeff());
    const double spread = values[worst] - values[best];
    if (size <= 1e-12 * (1.0 + simplex[best].norm()) ||
        (spread <= 1e-16 * (1.0 + std::abs(values[best])) &&
         size <= 1e-8 * (1.0 + simplex[best].norm()))) {
      out.converged = true;
      break;
    }

    Vector centroid = Vector::Zero(n);
    for (size_t i : order) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(n);

    const Vector reflected = centroid + (centroid - simplex[worst]);
    const double fr = track(reflected);
    if (fr < values[best]) {
      const Vector expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = track(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Vector contracted = outside ? Vector(centroid + 0.5 * (reflected - centroid))
                                      : Vector(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = track(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = track(simplex[i]);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  out.x = simplex[static_cast<size_t>(it - values.begin())];
  out.value = *it;
  out.gradient_norm = std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<Vector> grid_points(const Minimizer& cfg) {
  const Eigen::Index dim = cfg.lower.size();
  const int per_dim = std::max(cfg.grid_points, 2);
  long long total = 1;
  for (Eigen::Index i = 0; i < dim; ++i) total *= per_dim;
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(total));
  std::vector<int> idx(dim, 0);
  for (long long count = 0; count < total; ++count) {
    Vector p(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      p(i) = cfg.lower(i) + (cfg.upper(i) - cfg.lower(i)) * idx[i] / (per_dim - 1);
    }
    out.push_back(std::move(p));
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (++idx[i] < per_dim) break;
      idx[i] = 0;
    }
  }
  return out;
}

bool has_finite_box(const Minimizer& cfg, Eigen::Index dim) {
  return cfg.lower.size() == dim && cfg.upper.size() == dim &&
         cfg.lower.allFinite() && cfg.upper.allFinite() &&
         (cfg.upper - cfg.lower).minCoeff() >= 0.0;
}

}  // namespace

Minimizer Minimizer::box(int dim, double half_width) {
  Minimizer m;
  m.lower = Vector::Constant(dim, -half_width);
  m.upper = Vector::Constant(dim, half_width);
  return m;
}

Matrix fd_jacobian(const ResidualMap& residual, const Vector& x, double step_scale) {
  const double h = step_scale * (1.0 + x.norm());
  Matrix jac;
  Vector probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe(j) = x(j) + h;
    const Vector plus = residual(probe);
    probe(j) = x(j) - h;
    const Vector minus = residual(probe);
    probe(j) = x(j);
    if (j == 0) jac.resize(plus.size(), x.size());
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

MinimizeResult minimize(const Objective& objective, const ResidualMap& residual,
                        const std::vector<Vector>& hints, const Minimizer& config) {
  Eigen::Index dim = config.lower.size();
  if (!hints.empty()) dim = hints.front().size();
  if (dim == 0) throw DimensionError("minimize: no starting point or search box");
  for (const Vector& h : hints) {
    if (h.size() != dim) throw DimensionError("minimize: hint has the wrong dimension");
  }

  Tracker track(objective);
  std::vector<Vector> seeds = hints;
  const bool boxed = has_finite_box(config, dim);
  const bool use_grid = boxed && dim <= Minimizer::kMaxGridDim &&
                        (config.strategy == Minimizer::Strategy::kGridGaussNewton ||
                         config.strategy == Minimizer::Strategy::kGrid);
  if (use_grid) {
    std::vector<std::pair<double, Vector>> scored;
    for (Vector& p : grid_points(config)) {
      const double v = track(p);
      scored.emplace_back(v, std::move(p));
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    int taken = 0;
    for (auto& [v, p] : scored) {
      if (taken >= config.starts) break;
      seeds.push_back(std::move(p));
      ++taken;
    }
  } else if (boxed) {
    seeds.push_back(0.5 * (config.lower + config.upper));
  }
  if (seeds.empty()) seeds.push_back(Vector::Zero(dim));

  MinimizeResult out;
  if (config.strategy == Minimizer::Strategy::kGrid && use_grid) {
    for (const Vector& s : hints) track(s);
    out.argmin = track.best;
    out.value = track.best_value;
    out.evaluations = track.evaluations;
    out.gradient_norm = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const bool least_squares = static_cast<bool>(residual) &&
                             config.strategy != Minimizer::Strategy::kNelderMead;
  std::vector<LocalResult> locals;
  locals.reserve(seeds.size());
  for (const Vector& seed : seeds) {
    locals.push_back(least_squares ? levenberg_marquardt(residual, track, seed, config)
                                   : nelder_mead(track, seed, config));
  }

  const auto best_local = std::min_element(
      locals.begin(), locals.end(),
      [](const LocalResult& a, const LocalResult& b) { return a.value < b.value; });

  out.argmin = track.best;
  out.value = track.best_value;
  out.evaluations = track.evaluations;
  out.gradient_norm = best_local->gradient_norm;
  out.degraded = !best_local->converged;

  const double value_tol = 1e-9 * (1.0 + std::abs(best_local->value)) + config.tolerance;
  const double dist_tol = 1e-3 * (1.0 + best_local->x.norm());
  for (const LocalResult& other : locals) {
    if (std::abs(other.value - best_local->value) <= value_tol &&
        (other.x - best_local->x).norm() > dist_tol) {
      out.near_tie = true;
      break;
    }
  }
  return out;
}

}  // namespace dualhorizon::optim
