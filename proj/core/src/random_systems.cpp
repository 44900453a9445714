#include "dualhorizon/random_systems.hpp"

#include "dualhorizon/errors.hpp"

namespace dualhorizon::random {

namespace {
constexpr int kMaxRedraws = 10000;
}

double uniform(Engine& rng, double lo, double hi) {
  // 53 random mantissa bits -> [0, 1).
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

Vector uniform_vector(Engine& rng, int n, double lo, double hi) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

Matrix uniform_matrix(Engine& rng, int rows, int cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = uniform(rng, lo, hi);
  }
  return m;
}

Matrix spd_matrix(Engine& rng, int dim) {
  const Matrix m = uniform_matrix(rng, dim, dim);
  return m * m.transpose() + 0.5 * Matrix::Identity(dim, dim);
}

LinearSystem observable_system(Engine& rng, int n, int p, int horizon) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Matrix a = uniform_matrix(rng, n, n);
    Matrix c = uniform_matrix(rng, p, n);
    // Reject pairs that are observable only on the edge of numerical rank.
    if (is_full_column_rank(observability_stack(a, c, horizon), 1e-6)) {
      return LinearSystem(std::move(a), {}, std::move(c));
    }
  }
  throw SynthesisError("could not draw an observable system");
}

LinearSystem controllable_system(Engine& rng, int n, int m, int horizon) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Matrix a = uniform_matrix(rng, n, n);
    Matrix b = uniform_matrix(rng, n, m);
    if (is_full_row_rank(controllability_stack(a, b, horizon), 1e-6)) {
      return LinearSystem(std::move(a), std::move(b));
    }
  }
  throw SynthesisError("could not draw a controllable system");
}

}  // namespace dualhorizon::random
