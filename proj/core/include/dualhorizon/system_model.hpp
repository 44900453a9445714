#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dualhorizon/linalg.hpp"

namespace dualhorizon {

/// x+ = A x + B u, y = C x. B and C are optional; an absent matrix is stored
/// as an empty (0x0) Eigen matrix.
class LinearSystem {
 public:
  explicit LinearSystem(Matrix a, Matrix b = {}, Matrix c = {});

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }
  bool has_input() const { return b_.size() > 0; }
  bool has_output() const { return c_.size() > 0; }

  int state_dim() const { return static_cast<int>(a_.rows()); }
  int input_dim() const { return static_cast<int>(b_.cols()); }
  int output_dim() const { return static_cast<int>(c_.rows()); }

 private:
  Matrix a_;
  Matrix b_;
  Matrix c_;
};

using StateMap = std::function<Vector(const Vector&)>;

/// Properties a registry entry asserts about itself. They cannot be verified
/// globally and are only carried along for reporting.
struct DeclaredProperties {
  bool unique_stack_solution = false;  // equation stack uniquely solvable
  bool uniformly_observable = false;   // observability/J-decay conditions
  bool continuous_optimal_cost = false;
};

/// x+ = f(x), y = h(x). Both maps must be deterministic and side-effect free.
struct NonlinearSystem {
  std::string name;
  StateMap state_map;
  StateMap output_map;
  int state_dim = 0;
  int output_dim = 0;
  DeclaredProperties declared;
  /// Set when the maps are exactly x -> A x and x -> C x.
  std::optional<LinearSystem> linear;

  Vector f(const Vector& x) const { return state_map(x); }
  Vector h(const Vector& x) const { return output_map(x); }
  /// f applied `times` times; f^0 is the identity.
  Vector f_power(const Vector& x, int times) const;
};

/// Wraps a linear pair (A, C) as a NonlinearSystem.
NonlinearSystem as_nonlinear(const LinearSystem& sys, std::string name = "linear");

/// Finite list of inputs. Order is irrelevant; solvers sort it.
struct FiniteInputSet {
  std::vector<Vector> inputs;
};

/// Componentwise box; infinite bounds describe a continuum.
struct BoxInputSet {
  Vector lower;
  Vector upper;
};

using InputSet = std::variant<FiniteInputSet, BoxInputSet>;

/// Tracker plant x̂+ = F(x̂, u) following the reference x+ = f(x).
struct ControlledSystem {
  using Transition = std::function<Vector(const Vector&, const Vector&)>;

  std::string name;
  Transition transition;
  StateMap reference_map;
  InputSet input_set;
  int state_dim = 0;
  int input_dim = 0;
  DeclaredProperties declared;
  /// Set when F(z, u) = A z + B u and f(x) = A x.
  std::optional<LinearSystem> linear;

  Vector F(const Vector& z, const Vector& u) const { return transition(z, u); }
  Vector f(const Vector& x) const { return reference_map(x); }
  Vector f_power(const Vector& x, int times) const;
  bool is_finite() const {
    return std::holds_alternative<FiniteInputSet>(input_set);
  }
};

/// One simulation step. Optional fields are empty when they do not apply to
/// the mode or to the current step (e.g. delayed-state diagnostics before the
/// window fills).
struct TraceRecord {
  int k = 0;
  Vector x;
  std::optional<Vector> z;
  std::optional<Vector> eta;
  Vector xhat;
  std::optional<Vector> y;
  std::optional<Vector> u;
  /// Delayed plant state x_{k-N+1}.
  std::optional<Vector> x_delayed;
  double err_norm = 0.0;
  std::optional<double> cost_J;
  std::optional<double> cost_V;
  std::optional<double> lyap_lhs;
  std::optional<double> lyap_rhs;
  std::optional<double> identity_residual;
  bool feasible = true;
};

using Trace = std::vector<TraceRecord>;

/// Rows [C; CA; ...; CA^{N-1}].
Matrix observability_stack(const Matrix& a, const Matrix& c, int horizon);

/// Columns [B, AB, ..., A^{N-1}B].
Matrix controllability_stack(const Matrix& a, const Matrix& b, int horizon);

constexpr double kDefaultRankTolerance = 1e-10;

/// True iff rows <= cols and the smallest of the leading singular values
/// exceeds rel_tol times the largest. Throws DimensionError on empty input.
bool is_full_row_rank(const Matrix& m, double rel_tol = kDefaultRankTolerance);

/// Column-orientation counterpart, used for observability stacks.
bool is_full_column_rank(const Matrix& m,
                         double rel_tol = kDefaultRankTolerance);

/// [x0, f(x0), ..., f^steps(x0)]. Throws DivergenceError on non-finite values.
std::vector<Vector> iterate_autonomous(const LinearSystem& sys,
                                       const Vector& x0, int steps);
std::vector<Vector> iterate_autonomous(const NonlinearSystem& sys,
                                       const Vector& x0, int steps);

/// Throws DivergenceError when v has non-finite entries.
void require_finite(const Vector& v, std::string_view what, int step);

}  // namespace dualhorizon
