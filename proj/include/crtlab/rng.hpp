#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace crt {

/// Seed of a random stream. Identical seeds and parameters give
/// bit-identical output from every sampler.
struct RngSeed {
    std::uint64_t value = 0;

    friend bool operator==(RngSeed, RngSeed) = default;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of sub-stream `stream` of `base`. Replica k of an experiment uses
/// derive_seed(seed, k); streams for different k are decorrelated by the
/// mixing function rather than by sequential draws.
RngSeed derive_seed(RngSeed base, std::uint64_t stream) noexcept;

class Rng {
public:
    using result_type = std::mt19937_64::result_type;

    explicit Rng(RngSeed seed) : engine_(mix64(seed.value)) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Standard normal (ziggurat; stateless between calls).
    double normal() { return normal_(engine_); }

    /// Uniform on [0, 1).
    double uniform() { return std::generate_canonical<double, 53>(engine_); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

private:
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
};

}  // namespace crt
