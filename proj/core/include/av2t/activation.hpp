#pragma once

#include "av2t/common.hpp"

#include <string_view>

namespace av2t {

/// Pointwise nonlinearities. gelu is the exact (erf) form.
enum class Activation { gelu, silu, tanh, identity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

double activate(Activation a, double x);
/// d activate / dx evaluated at the pre-activation x.
double activate_grad(Activation a, double x);

Matrix activate(Activation a, const Matrix& x);
Matrix activate_grad(Activation a, const Matrix& x);

}  // namespace av2t
