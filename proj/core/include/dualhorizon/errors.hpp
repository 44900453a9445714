#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dualhorizon {

/// Failure categories. The CLI maps each category onto a process exit code.
enum class ErrorKind {
  kConfig,      // malformed or inconsistent input
  kDimension,   // matrix/vector sizes do not agree
  kSynthesis,   // rank hypothesis violated, singular weight
  kSolver,      // iterative solver did not converge
  kInfeasible,  // terminal constraint cannot be met
  kDivergence,  // non-finite values during simulation
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorKind::kDimension, what) {}
};

class SynthesisError : public Error {
 public:
  explicit SynthesisError(const std::string& what)
      : Error(ErrorKind::kSynthesis, what) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what)
      : Error(ErrorKind::kDivergence, what) {}
};

/// Raised when an iterative solver exhausts its budget; carries the best
/// residual it reached.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double best_residual)
      : Error(ErrorKind::kSolver, what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::kInfeasible, what) {}
};

/// Configuration problems. Every violation found during validation is kept
/// so the caller can report them all at once.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  ConfigError(const std::string& what, std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<std::string> violations_;
};

}  // namespace dualhorizon
