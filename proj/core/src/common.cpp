#include "av2t/common.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace av2t {

double SplitMix::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
    const auto* p = reinterpret_cast<const std::byte*>(label.data());
    SplitMix mix(base ^ fnv1a({p, label.size()}));
    return mix.next();
}

std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t h) {
    for (std::byte b : bytes) {
        h ^= static_cast<std::uint64_t>(b);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t checksum(const Matrix& m, std::uint64_t h) {
    const auto* p = reinterpret_cast<const std::byte*>(m.data());
    return fnv1a({p, static_cast<std::size_t>(m.size()) * sizeof(double)}, h);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace av2t
