#pragma once

#include <cstdint>
#include <limits>

namespace rbsdej {

/// Noise channels of a path bundle; channel 1 + j carries mark j.
enum class Channel : std::uint64_t {
    brownian = 0,
    first_mark = 1,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based substream keyed by (seed, path, step, channel).
///
/// Satisfies UniformRandomBitGenerator so the standard distributions can
/// draw from it. Two streams with the same key produce the same sequence
/// regardless of which thread or in which order they are created.
class StreamRng {
public:
    using result_type = std::uint64_t;

    StreamRng(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t channel)
        : state_(splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ path) ^ step) ^ channel)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

}  // namespace rbsdej
