#include "av2t/activation.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace av2t {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::gelu: return "gelu";
        case Activation::silu: return "silu";
        case Activation::tanh: return "tanh";
        case Activation::identity: return "identity";
    }
    return "?";
}

Activation parse_activation(std::string_view s) {
    if (s == "gelu") return Activation::gelu;
    if (s == "silu") return Activation::silu;
    if (s == "tanh") return Activation::tanh;
    if (s == "identity") return Activation::identity;
    throw std::invalid_argument(fmt::format("unknown activation '{}'", s));
}

double activate(Activation a, double x) {
    switch (a) {
        case Activation::gelu: return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
        case Activation::silu: return x / (1.0 + std::exp(-x));
        case Activation::tanh: return std::tanh(x);
        case Activation::identity: return x;
    }
    return x;
}

double activate_grad(Activation a, double x) {
    switch (a) {
        case Activation::gelu: {
            const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
            const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
            return cdf + x * pdf;
        }
        case Activation::silu: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 + x * (1.0 - s));
        }
        case Activation::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

Matrix activate(Activation a, const Matrix& x) {
    return x.unaryExpr([a](double v) { return activate(a, v); });
}

Matrix activate_grad(Activation a, const Matrix& x) {
    return x.unaryExpr([a](double v) { return activate_grad(a, v); });
}

}  // namespace av2t
