#pragma once

#include <cstdint>
#include <random>

namespace cosci {

using Engine = std::mt19937_64;

/// Independent, reproducible substream `stream` of the master seed `seed`.
/// Streams are keyed by (seed, stream) only, so generation order never matters.
inline Engine make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x636f7363u};
    return Engine(seq);
}

/// Uniform draw on the open interval (0, 1) with 53 random bits.
inline double uniform_open(Engine& engine) {
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace cosci
