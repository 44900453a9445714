#pragma once

#include <cstdint>
#include <random>

#include "dualhorizon/system_model.hpp"

namespace dualhorizon::random {

using Engine = std::mt19937_64;

/// Uniform draw in [lo, hi). Built on the raw engine output so sequences are
/// identical across standard libraries.
double uniform(Engine& rng, double lo, double hi);

Vector uniform_vector(Engine& rng, int n, double lo = -1.0, double hi = 1.0);
Matrix uniform_matrix(Engine& rng, int rows, int cols, double lo = -1.0,
                      double hi = 1.0);

/// M M^T + 0.5 I with M uniform in [-1, 1].
Matrix spd_matrix(Engine& rng, int dim);

/// (A, C) with entries uniform in [-1, 1], redrawn until the N-step
/// observability stack has full column rank.
LinearSystem observable_system(Engine& rng, int n, int p, int horizon);

/// (A, B) redrawn until the N-step controllability stack has full row rank.
LinearSystem controllable_system(Engine& rng, int n, int m, int horizon);

}  // namespace dualhorizon::random
