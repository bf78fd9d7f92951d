#pragma once

#include <cstdint>
#include <cstddef>

#include "sylva/errors.hpp"

namespace sylva {

/// Deterministic 64-bit generator (splitmix64). Cheap to construct, so each
/// logical stream gets its own instance: Monte-Carlo rollout i always draws
/// from substream(seed, i), which makes results independent of evaluation
/// order and reproducible across platforms.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 bits of precision.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform index in {0, .., n-1}; rejection sampling, no modulo bias.
    std::size_t next_index(std::size_t n) {
        if (n == 0) {
            throw DomainError("next_index: empty range");
        }
        const std::uint64_t span = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x = next_u64();
        while (x >= limit) {
            x = next_u64();
        }
        return static_cast<std::size_t>(x % span);
    }

private:
    std::uint64_t state_;
};

/// Mixes (seed, stream) into an initial state so distinct stream ids give
/// statistically independent substreams of the same seed.
inline std::uint64_t substream_state(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 a(seed);
    SplitMix64 b(stream ^ 0xa5a5a5a55a5a5a5aull);
    return a.next_u64() ^ b.next_u64();
}

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
    return SplitMix64(substream_state(seed, stream));
}

} // namespace sylva
