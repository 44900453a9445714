#include "dualhorizon/errors.hpp"

#include <sstream>

namespace dualhorizon {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kSynthesis: return "synthesis";
    case ErrorKind::kSolver: return "solver";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kDivergence: return "divergence";
  }
  return "unknown";
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::ostringstream out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out << "; ";
    out << items[i];
  }
  return out.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(ErrorKind::kConfig, "invalid configuration: " + join(violations)),
      violations_(std::move(violations)) {}

ConfigError::ConfigError(const std::string& what,
                         std::vector<std::string> violations)
    : Error(ErrorKind::kConfig, what), violations_(std::move(violations)) {}

}  // namespace dualhorizon
