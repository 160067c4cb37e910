#pragma once

#include <cstdint>
#include <random>

namespace fosr {

using Rng = std::mt19937_64;

/// Deterministic per-worker stream: chains use (seed, chain), replications
/// use (seed, replication, chain). Streams derived this way are independent
/// of execution order, so parallel runs stay bit-reproducible.
inline Rng make_stream(std::uint64_t seed, std::uint64_t a,
                       std::uint64_t b = 0xb5ad4eceda1ce2a9ULL,
                       std::uint64_t c = 0x2d358dccaa6c78a5ULL) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c),    static_cast<std::uint32_t>(c >> 32)};
    return Rng(seq);
}

}  // namespace fosr
