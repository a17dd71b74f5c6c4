#pragma once

#include <cstdint>
#include <utility>

namespace mcle {

/// Stateless counter-based generator: every (seed, stream, index) triple maps
/// to a fixed value, so draws can be assigned per walker and per step without
/// any shared sequential state.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const noexcept;
    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t stream, std::uint64_t index) const noexcept;
    /// Standard normal; pairs (2m, 2m+1) of an index share one Box-Muller draw.
    double normal(std::uint64_t stream, std::uint64_t index) const noexcept;
    /// Both normals of pair m, i.e. normal(stream, 2m) and normal(stream, 2m+1).
    std::pair<double, double> normal_pair(std::uint64_t stream, std::uint64_t pair) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

} // namespace mcle
