#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lpcasrc {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream key from a master seed and a tuple of counters.
/// Streams for distinct key tuples are independent of evaluation order, so
/// parallel work items stay reproducible.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) noexcept
{
    std::uint64_t h = mix64(seed);
    for (const auto c : counters)
        h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
    return h;
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> counters)
{
    return std::mt19937_64(stream_key(seed, counters));
}

/// Uniform draw from the open interval (0, 1).
template <class Engine>
double uniform_open01(Engine& engine)
{
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = 0.0;
    while (u == 0.0)
        u = dist(engine);
    return u;
}

} // namespace lpcasrc
