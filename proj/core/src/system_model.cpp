#include "dualhorizon/system_model.hpp"

#include <string>

#include "dualhorizon/errors.hpp"

namespace dualhorizon {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_pair(const Matrix& a, const Matrix& other, bool other_is_output,
                  const char* op) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionError(std::string(op) + ": A is " + shape(a) +
                         ", expected nonempty square");
  }
  const bool ok = other_is_output ? other.cols() == a.rows() && other.rows() > 0
                                  : other.rows() == a.rows() && other.cols() > 0;
  if (!ok) {
    throw DimensionError(std::string(op) + ": " + (other_is_output ? "C" : "B") +
                         " is " + shape(other) + ", incompatible with A " +
                         shape(a));
  }
}

}  // namespace

LinearSystem::LinearSystem(Matrix a, Matrix b, Matrix c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (a_.rows() != a_.cols() || a_.rows() == 0) {
    throw DimensionError("A is " + shape(a_) + ", expected nonempty square");
  }
  if (b_.size() > 0 && b_.rows() != a_.rows()) {
    throw DimensionError("B is " + shape(b_) + ", expected " +
                         std::to_string(a_.rows()) + " rows");
  }
  if (c_.size() > 0 && c_.cols() != a_.rows()) {
    throw DimensionError("C is " + shape(c_) + ", expected " +
                         std::to_string(a_.rows()) + " columns");
  }
  if (!a_.allFinite() || !b_.allFinite() || !c_.allFinite()) {
    throw DimensionError("system matrices contain non-finite entries");
  }
}

Vector NonlinearSystem::f_power(const Vector& x, int times) const {
  Vector out = x;
  for (int i = 0; i < times; ++i) out = state_map(out);
  return out;
}

Vector ControlledSystem::f_power(const Vector& x, int times) const {
  Vector out = x;
  for (int i = 0; i < times; ++i) out = reference_map(out);
  return out;
}

NonlinearSystem as_nonlinear(const LinearSystem& sys, std::string name) {
  if (!sys.has_output()) throw DimensionError("linear system has no output map");
  NonlinearSystem out;
  out.name = std::move(name);
  const Matrix a = sys.A();
  const Matrix c = sys.C();
  out.state_map = [a](const Vector& x) -> Vector { return a * x; };
  out.output_map = [c](const Vector& x) -> Vector { return c * x; };
  out.state_dim = sys.state_dim();
  out.output_dim = sys.output_dim();
  out.linear = sys;
  return out;
}

Matrix observability_stack(const Matrix& a, const Matrix& c, int horizon) {
  require_pair(a, c, /*other_is_output=*/true, "observability_stack");
  if (horizon < 1) throw DimensionError("observability_stack: N must be >= 1");
  const Eigen::Index p = c.rows();
  Matrix out(p * horizon, a.cols());
  Matrix block = c;
  for (int i = 0; i < horizon; ++i) {
    out.middleRows(i * p, p) = block;
    block = block * a;
  }
  return out;
}

Matrix controllability_stack(const Matrix& a, const Matrix& b, int horizon) {
  require_pair(a, b, /*other_is_output=*/false, "controllability_stack");
  if (horizon < 1) throw DimensionError("controllability_stack: N must be >= 1");
  const Eigen::Index m = b.cols();
  Matrix out(a.rows(), m * horizon);
  Matrix block = b;
  for (int i = 0; i < horizon; ++i) {
    out.middleCols(i * m, m) = block;
    block = a * block;
  }
  return out;
}

bool is_full_row_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) throw DimensionError("rank query on an empty matrix");
  if (m.rows() > m.cols()) return false;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  const double largest = s(0);
  if (!(largest > 0.0)) return false;
  return s(s.size() - 1) > rel_tol * largest;
}

bool is_full_column_rank(const Matrix& m, double rel_tol) {
  return is_full_row_rank(m.transpose(), rel_tol);
}

void require_finite(const Vector& v, std::string_view what, int step) {
  if (!v.allFinite()) {
    throw DivergenceError(std::string(what) + " became non-finite at step " +
                          std::to_string(step));
  }
}

std::vector<Vector> iterate_autonomous(const LinearSystem& sys, const Vector& x0,
                                       int steps) {
  if (x0.size() != sys.state_dim()) {
    throw DimensionError("x0 has " + std::to_string(x0.size()) +
                         " entries, expected " + std::to_string(sys.state_dim()));
  }
  if (steps < 0) throw DimensionError("steps must be nonnegative");
  std::vector<Vector> out;
  out.reserve(steps + 1);
  out.push_back(x0);
  require_finite(x0, "state", 0);
  for (int k = 1; k <= steps; ++k) {
    out.push_back(sys.A() * out.back());
    require_finite(out.back(), "state", k);
  }
  return out;
}

std::vector<Vector> iterate_autonomous(const NonlinearSystem& sys, const Vector& x0,
                                       int steps) {
  if (x0.size() != sys.state_dim) {
    throw DimensionError("x0 has " + std::to_string(x0.size()) +
                         " entries, expected " + std::to_string(sys.state_dim));
  }
  if (steps < 0) throw DimensionError("steps must be nonnegative");
  std::vector<Vector> out;
  out.reserve(steps + 1);
  out.push_back(x0);
  require_finite(x0, "state", 0);
  for (int k = 1; k <= steps; ++k) {
    out.push_back(sys.f(out.back()));
    require_finite(out.back(), "state", k);
  }
  return out;
}

}  // namespace dualhorizon
