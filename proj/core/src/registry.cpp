#include "dualhorizon/registry.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "dualhorizon/errors.hpp"

namespace dualhorizon::registry {

namespace {

/// Copies known parameters over defaults and rejects unknown keys.
Params resolve(const std::string& name, const Params& defaults,
               const Params& given) {
  Params out = defaults;
  std::vector<std::string> bad;
  for (const auto& [key, value] : given) {
    if (!defaults.count(key)) {
      bad.push_back("system.params." + key + ": unknown parameter for '" + name + "'");
    } else if (!std::isfinite(value)) {
      bad.push_back("system.params." + key + ": must be finite");
    } else {
      out[key] = value;
    }
  }
  if (!bad.empty()) throw ConfigError(bad);
  return out;
}

NonlinearSystem cubic_output(const Params& given) {
  const Params p = resolve("cubic_output", {{"a", 0.9}}, given);
  const double a = p.at("a");
  NonlinearSystem sys;
  sys.name = "cubic_output";
  sys.state_map = [a](const Vector& x) -> Vector { return a * x; };
  sys.output_map = [](const Vector& x) -> Vector { return x.array().cube().matrix(); };
  sys.state_dim = 1;
  sys.output_dim = 1;
  sys.declared = {.unique_stack_solution = true,
                  .uniformly_observable = true,
                  .continuous_optimal_cost = true};
  return sys;
}

NonlinearSystem rotation_saturated(const Params& given) {
  const Params p = resolve("rotation_saturated",
                           {{"rho", 0.95}, {"theta", 0.5}, {"gain", 0.5}}, given);
  const double rho = p.at("rho");
  const double c = std::cos(p.at("theta"));
  const double s = std::sin(p.at("theta"));
  const double gain = p.at("gain");
  NonlinearSystem sys;
  sys.name = "rotation_saturated";
  sys.state_map = [rho, c, s](const Vector& x) -> Vector {
    Vector out(2);
    out << rho * (c * x(0) - s * x(1)), rho * (s * x(0) + c * x(1));
    return out;
  };
  // Strictly increasing in x1, hence invertible.
  sys.output_map = [gain](const Vector& x) -> Vector {
    Vector out(1);
    out << x(0) + gain * std::tanh(x(0));
    return out;
  };
  sys.state_dim = 2;
  sys.output_dim = 1;
  sys.declared = {.unique_stack_solution = true,
                  .uniformly_observable = true,
                  .continuous_optimal_cost = true};
  return sys;
}

NonlinearSystem damped_pendulum(const Params& given) {
  const Params p = resolve("damped_pendulum", {{"dt", 0.1}, {"damping", 0.95}}, given);
  const double dt = p.at("dt");
  const double damping = p.at("damping");
  NonlinearSystem sys;
  sys.name = "damped_pendulum";
  sys.state_map = [dt, damping](const Vector& x) -> Vector {
    Vector out(2);
    out << x(0) + dt * x(1), damping * x(1) - dt * std::sin(x(0));
    return out;
  };
  sys.output_map = [](const Vector& x) -> Vector { return x.head(1); };
  sys.state_dim = 2;
  sys.output_dim = 1;
  sys.declared = {.unique_stack_solution = true,
                  .uniformly_observable = false,
                  .continuous_optimal_cost = false};
  return sys;
}

ControlledSystem integer_walk(const Params& given) {
  resolve("integer_walk", {}, given);
  ControlledSystem sys;
  sys.name = "integer_walk";
  sys.transition = [](const Vector& z, const Vector& u) -> Vector { return z + u; };
  sys.reference_map = [](const Vector& x) -> Vector { return x; };
  FiniteInputSet inputs;
  for (double u : {-1.0, 0.0, 1.0}) inputs.inputs.push_back(Vector::Constant(1, u));
  sys.input_set = inputs;
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.declared = {.unique_stack_solution = false,
                  .uniformly_observable = false,
                  .continuous_optimal_cost = false};
  return sys;
}

ControlledSystem additive_sine(const Params& given) {
  const Params p = resolve("additive_sine", {{"a", 0.8}, {"b", 0.3}, {"dim", 1}}, given);
  const double a = p.at("a");
  const double b = p.at("b");
  const double dim_value = p.at("dim");
  if (dim_value < 1 || dim_value > 8 || dim_value != std::floor(dim_value)) {
    throw ConfigError({"system.params.dim: must be an integer in [1, 8]"});
  }
  const int dim = static_cast<int>(dim_value);
  ControlledSystem sys;
  sys.name = "additive_sine";
  auto f = [a, b](const Vector& x) -> Vector {
    return (a * x.array() + b * x.array().sin()).matrix();
  };
  sys.reference_map = f;
  sys.transition = [f](const Vector& z, const Vector& u) -> Vector { return f(z) + u; };
  const double inf = std::numeric_limits<double>::infinity();
  sys.input_set = BoxInputSet{Vector::Constant(dim, -inf), Vector::Constant(dim, inf)};
  sys.state_dim = dim;
  sys.input_dim = dim;
  sys.declared = {.unique_stack_solution = false,
                  .uniformly_observable = false,
                  .continuous_optimal_cost = true};
  return sys;
}

}  // namespace

NonlinearSystem make_nonlinear(const std::string& name, const Params& params) {
  if (name == "cubic_output") return cubic_output(params);
  if (name == "rotation_saturated") return rotation_saturated(params);
  if (name == "damped_pendulum") return damped_pendulum(params);
  throw ConfigError({"system.name: unknown nonlinear system '" + name + "'"});
}

ControlledSystem make_controlled(const std::string& name, const Params& params) {
  if (name == "integer_walk") return integer_walk(params);
  if (name == "additive_sine") return additive_sine(params);
  throw ConfigError({"system.name: unknown controlled system '" + name + "'"});
}

ControlledSystem make_linear_controlled(const LinearSystem& sys) {
  if (!sys.has_input()) throw DimensionError("linear tracker needs an input matrix B");
  const Matrix a = sys.A();
  const Matrix b = sys.B();
  ControlledSystem out;
  out.name = "linear";
  out.transition = [a, b](const Vector& z, const Vector& u) -> Vector {
    return a * z + b * u;
  };
  out.reference_map = [a](const Vector& x) -> Vector { return a * x; };
  const double inf = std::numeric_limits<double>::infinity();
  out.input_set = BoxInputSet{Vector::Constant(b.cols(), -inf),
                              Vector::Constant(b.cols(), inf)};
  out.state_dim = sys.state_dim();
  out.input_dim = sys.input_dim();
  out.declared.continuous_optimal_cost = true;
  out.linear = sys;
  return out;
}

std::vector<std::string> nonlinear_names() {
  return {"cubic_output", "damped_pendulum", "rotation_saturated"};
}

std::vector<std::string> controlled_names() {
  return {"additive_sine", "integer_walk"};
}

}  // namespace dualhorizon::registry
