#include "dualhorizon/stage_cost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dualhorizon/errors.hpp"
#include "dualhorizon/random_systems.hpp"

namespace dualhorizon::nl {

namespace {

std::vector<double> split_numbers(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError({field + ": '" + item + "' is not a number"});
    }
  }
  return out;
}

}  // namespace

StageCost quadratic(const Matrix& weight) {
  if (!linalg::is_symmetric(weight)) {
    throw ConfigError({"stage_cost: quadratic weight must be symmetric"});
  }
  const double lo = linalg::lambda_min(weight);
  const double hi = linalg::lambda_max(weight);
  if (lo < -1e-12 * std::max(1.0, hi)) {
    throw ConfigError({"stage_cost: quadratic weight must be positive semidefinite"});
  }
  const Matrix root = linalg::psd_square_root(weight);
  StageCost out;
  out.name = "quad";
  out.cost = [weight](const Vector& v, const Vector& w) {
    return linalg::weighted_norm_sq(v - w, weight);
  };
  out.residual = [root](const Vector& v, const Vector& w) -> Vector {
    return root * (v - w);
  };
  const double lo_clamped = std::max(lo, 0.0);
  out.alpha1 = [lo_clamped](double s) { return lo_clamped * s * s; };
  out.alpha2 = [hi](double s) { return hi * s * s; };
  return out;
}

StageCost absolute(int dim) {
  StageCost out;
  out.name = "abs";
  out.cost = [](const Vector& v, const Vector& w) { return (v - w).cwiseAbs().sum(); };
  // |e|_2 <= |e|_1 <= sqrt(d) |e|_2
  const double root_dim = std::sqrt(static_cast<double>(std::max(dim, 1)));
  out.alpha1 = [](double s) { return s; };
  out.alpha2 = [root_dim](double s) { return root_dim * s; };
  return out;
}

StageCost tabulated(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2 || points.front().first != 0.0 || points.front().second != 0.0) {
    throw ConfigError({"stage_cost.table: needs at least two points starting at (0, 0)"});
  }
  for (size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].first > points[i - 1].first) ||
        !(points[i].second > points[i - 1].second)) {
      throw ConfigError({"stage_cost.table: points must be strictly increasing"});
    }
  }
  auto profile = [points](double s) {
    auto it = std::upper_bound(points.begin(), points.end(), s,
                               [](double v, const auto& p) { return v < p.first; });
    size_t hi = static_cast<size_t>(it - points.begin());
    if (hi == 0) hi = 1;
    if (hi >= points.size()) hi = points.size() - 1;
    const auto& [s0, g0] = points[hi - 1];
    const auto& [s1, g1] = points[hi];
    return g0 + (g1 - g0) * (s - s0) / (s1 - s0);
  };
  StageCost out;
  out.name = "table";
  out.cost = [profile](const Vector& v, const Vector& w) { return profile((v - w).norm()); };
  out.alpha1 = profile;
  out.alpha2 = profile;
  return out;
}

StageCost parse_stage_cost(const std::string& spec, int dim) {
  if (spec == "abs") return absolute(dim);
  if (spec == "quad") return quadratic(Matrix::Identity(dim, dim));
  if (spec.rfind("quad:", 0) == 0) {
    const std::vector<double> values = split_numbers(spec.substr(5), "stage_cost");
    if (values.size() == 1) {
      return quadratic(values[0] * Matrix::Identity(dim, dim));
    }
    if (static_cast<int>(values.size()) != dim) {
      throw ConfigError({"stage_cost: diagonal has " + std::to_string(values.size()) +
                         " entries, expected " + std::to_string(dim)});
    }
    return quadratic(Eigen::Map<const Vector>(values.data(), dim).asDiagonal());
  }
  throw ConfigError({"stage_cost: unknown stage cost '" + spec + "'"});
}

ClassKFunction parse_class_k(const std::string& spec) {
  if (spec == "identity") return [](double s) { return s; };
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string kind = spec.substr(0, colon);
    const std::vector<double> c = split_numbers(spec.substr(colon + 1), "alpha");
    if (c.size() == 1 && c[0] > 0.0) {
      const double k = c[0];
      if (kind == "quad") return [k](double s) { return k * s * s; };
      if (kind == "lin") return [k](double s) { return k * s; };
    }
  }
  throw ConfigError({"alpha: expected 'identity', 'lin:c' or 'quad:c' with c > 0, got '" +
                     spec + "'"});
}

bool is_class_k_on_grid(const ClassKFunction& alpha) {
  if (!alpha) return false;
  if (std::abs(alpha(0.0)) > 1e-15) return false;
  double prev = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double s = std::pow(10.0, -6.0 + 9.0 * i / 19.0);
    const double v = alpha(s);
    if (!std::isfinite(v) || !(v > prev)) return false;
    prev = v;
  }
  return true;
}

StageCostCheck check_stage_cost(const StageCost& cost, const Vector& lower,
                                const Vector& upper, int samples, std::uint64_t seed) {
  StageCostCheck out;
  out.alpha1_monotone = is_class_k_on_grid(cost.alpha1);
  out.alpha2_monotone = is_class_k_on_grid(cost.alpha2);
  random::Engine rng(seed);
  const auto draw = [&] {
    Vector v(lower.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = random::uniform(rng, lower(i), upper(i));
    return v;
  };
  for (int s = 0; s < samples; ++s) {
    const Vector v = draw();
    const Vector w = draw();
    const double vw = cost(v, w);
    out.max_asymmetry = std::max(out.max_asymmetry, std::abs(vw - cost(w, v)));
    out.max_self_cost = std::max(out.max_self_cost, std::abs(cost(v, v)));
    const double dist = (v - w).norm();
    const double slack = 1e-12 * (1.0 + std::abs(vw));
    if (cost.alpha1(dist) > vw + slack || vw > cost.alpha2(dist) + slack) {
      ++out.bound_violations;
    }
    ++out.samples;
  }
  return out;
}

}  // namespace dualhorizon::nl
