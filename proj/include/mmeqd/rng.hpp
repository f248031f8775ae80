#ifndef MMEQD_RNG_HPP
#define MMEQD_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace mmeqd {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t splitmix64_gamma = 0x9e3779b97f4a7c15ULL;

/// Hashes an ordered tuple of identifiers into a stream key. Used to give
/// every (experiment, trial, block, hypothesis) its own independent stream.
constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> ids) noexcept {
    std::uint64_t key = 0x6d6d65716421ULL;
    for (std::uint64_t id : ids) key = splitmix64_mix(key ^ splitmix64_mix(id + splitmix64_gamma));
    return key;
}

/// Counter-based generator: output i of stream `key` is
/// splitmix64_mix(key + i * gamma). Any (key, i) is addressable directly, so
/// results do not depend on how work is scheduled. Transforms to floating
/// point are written out here (not delegated to <random> distributions) so a
/// given key yields the same doubles on every standard library.
class CounterRng {
public:
    static constexpr const char* algorithm = "splitmix64-counter";

    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t next_u64() noexcept {
        ++counter_;
        return splitmix64_mix(key_ + counter_ * splitmix64_gamma);
    }

    /// Uniform on (0, 1], 53-bit resolution.
    double uniform_open0() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n) (Lemire multiply-shift on the top 32 bits).
    std::uint32_t below(std::uint32_t n) noexcept {
        return static_cast<std::uint32_t>(((next_u64() >> 32) * static_cast<std::uint64_t>(n)) >> 32);
    }

    /// Circularly symmetric complex Gaussian with E|z|^2 = 1 (each component
    /// variance 1/2), by the Box-Muller construction.
    std::complex<double> complex_normal() noexcept {
        const double radius = std::sqrt(-std::log(uniform_open0()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace mmeqd

#endif // MMEQD_RNG_HPP
