#include "mcle/rng.hpp"

#include <cmath>
#include <numbers>

namespace mcle {

namespace {

constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t index) const noexcept {
    std::uint64_t z = mix(seed_ + 0x9e3779b97f4a7c15ULL);
    z = mix(z ^ (stream + 0x632be59bd9b4e019ULL));
    return mix(z ^ (index * 0x9e3779b97f4a7c15ULL + 0xd1b54a32d192ed03ULL));
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t index) const noexcept {
    return (static_cast<double>(bits(stream, index) >> 11) + 0.5) * 0x1.0p-53;
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t stream, std::uint64_t pair) const noexcept {
    const double u1 = uniform(stream, 2 * pair);
    const double u2 = uniform(stream, 2 * pair + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(angle), r * std::sin(angle)};
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t index) const noexcept {
    const auto [a, b] = normal_pair(stream, index >> 1);
    return (index & 1U) ? b : a;
}

} // namespace mcle
