#pragma once

#include <map>
#include <string>
#include <vector>

#include "dualhorizon/system_model.hpp"

namespace dualhorizon::registry {

using Params = std::map<std::string, double>;

/// Built-in autonomous plants:
///   cubic_output        x+ = a x, y = x^3                 (a = 0.9)
///   rotation_saturated  x+ = rho Rot(theta) x,
///                       y = x1 + gain tanh(x1)            (rho = 0.95, theta = 0.5, gain = 0.5)
///   damped_pendulum     x+ = (x1 + dt x2, damping x2 - dt sin x1), y = x1
///                                                         (dt = 0.1, damping = 0.95)
/// Throws ConfigError for unknown names or parameters.
NonlinearSystem make_nonlinear(const std::string& name, const Params& params = {});

/// Built-in tracker plants:
///   integer_walk   f(x) = x, F(z,u) = z + u, U = {-1, 0, 1}   (scalar)
///   additive_sine  f(x) = a x + b sin(x), F(z,u) = f(z) + u, U = R
///                                                             (a = 0.8, b = 0.3, dim = 1)
ControlledSystem make_controlled(const std::string& name, const Params& params = {});

/// Linear tracker F(z,u) = A z + B u, f(x) = A x, with U = R^m.
ControlledSystem make_linear_controlled(const LinearSystem& sys);

std::vector<std::string> nonlinear_names();
std::vector<std::string> controlled_names();

}  // namespace dualhorizon::registry
