#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace relmatch::util {

/// Deterministic random stream. mt19937_64 output is pinned by the standard;
/// the float/int conversions below avoid std::uniform_*_distribution, whose
/// algorithms vary between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [-1, 1).
    double symmetric() { return 2.0 * unit() - 1.0; }

    /// Uniform index in [0, n). n must be positive.
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    bool chance(double p) { return unit() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[below(items.size())];
    }

private:
    std::mt19937_64 gen_;
};

/// Mixes two seeds into one (splitmix64 finalizer).
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace relmatch::util
