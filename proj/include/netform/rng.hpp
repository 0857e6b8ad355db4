#pragma once

#include <cmath>
#include <cstdint>

namespace netform {

/// Counter-based SplitMix64 generator.
///
/// The state advances by a fixed Weyl increment and every output is a pure
/// mix of the state, so the k-th draw of a stream is a function of
/// (seed, stream, k) alone and identical on every platform.
///
/// Stream splitting: substream `s` of master seed `q` starts from
/// state0 = mix(q + gamma) ^ mix(s + 0x1F123BB5159A55E5). Feeding the
/// stream id through the mixer places substreams at pseudorandom offsets
/// of the Weyl orbit (an arithmetic offset would collide with the
/// increment itself), so replicas get independent reproducible streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(seed + 0x9E3779B97F4A7C15ull) ^ mix(stream + 0x1F123BB5159A55E5ull)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Exponential holding time with the given rate. rate > 0.
    double next_exponential(double rate) {
        return -std::log1p(-next_unit()) / rate;
    }

    /// Uniform integer in [0, n). Multiply-high mapping; bias < n * 2^-64.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool next_bernoulli(double p) { return next_unit() < p; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

} // namespace netform
