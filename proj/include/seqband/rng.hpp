#pragma once

#include <cstdint>
#include <random>

namespace seqband {

using Engine = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Key for an independent stream: (seed, index, lane). Results depend only on the key,
/// never on which worker consumes the stream.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index, std::uint64_t lane = 0)
{
    return detail::splitmix64(detail::splitmix64(detail::splitmix64(seed) ^ index) + lane);
}

inline Engine make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t lane = 0)
{
    return Engine(stream_key(seed, index, lane));
}

/// Uniform on the open interval (0, 1).
inline double open_uniform(Engine& eng)
{
    // 53 random bits, shifted off zero
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace seqband
