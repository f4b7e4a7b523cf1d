#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qtl::rng {

/// SplitMix64 output function (the finalizer of Steele, Lea & Flood).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent 64-bit stream seed from a master seed and a path
/// of counters, e.g. {trajectory} or {fiducial, branch}. The derivation is a
/// fold of mix64 over the path, so it depends only on the values, never on
/// the order in which streams are requested or on the worker that asks.
std::uint64_t substream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Standard-normal and uniform draws from a 64-bit Mersenne Twister.
/// Copying a stream copies its full state (including the cached second
/// normal variate), so a clone continues with the identical sequence.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    void reseed(std::uint64_t seed) {
        engine_.seed(seed);
        normal_.reset();
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace qtl::rng
