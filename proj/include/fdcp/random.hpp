#pragma once

#include <cstdint>
#include <random>

namespace fdcp {

using Rng = std::mt19937_64;

/// Independent generator for work item `stream` under a master seed. Streams
/// depend only on (seed, stream), never on scheduling.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    return Rng(seq);
}

}  // namespace fdcp
