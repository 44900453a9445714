#pragma once

#include <string>

#include "dualhorizon/errors.hpp"
#include "dualhorizon/linalg.hpp"

namespace dualhorizon::detail {

/// R must be dim x dim, symmetric and positive definite.
inline void require_weight(const Matrix& r, Eigen::Index dim, const char* what) {
  if (r.rows() != dim || r.cols() != dim) {
    throw ConfigError({std::string(what) + ": expected " + std::to_string(dim) + "x" +
                       std::to_string(dim) + ", got " + std::to_string(r.rows()) + "x" +
                       std::to_string(r.cols())});
  }
  if (!linalg::is_symmetric(r)) {
    throw ConfigError({std::string(what) + ": must be symmetric"});
  }
  if (!(linalg::lambda_min(r) > 0.0)) {
    throw ConfigError({std::string(what) + ": must be positive definite"});
  }
}

/// (W^T diag(R) W)^{-1} (C A^{N-1})^T R for W = [C; CA; ...; CA^{N-1}], taken
/// from a QR of the weighted stack instead of the normal equations. W must
/// have full column rank.
Matrix horizon_pinv_block(const Matrix& a, const Matrix& c, int horizon, const Matrix& r);

}  // namespace dualhorizon::detail
