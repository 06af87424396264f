#pragma once

// Reproducible random streams. Every logical stream (a Monte Carlo trial, a
// Doob completion) gets its own engine seeded from a hash of the master seed
// and the stream's coordinates, so results never depend on scheduling.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cflab {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic seed for the stream addressed by `path` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path)
{
    return Rng(derive_seed(master, path));
}

} // namespace cflab
