#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace specdiff {

/// Engine seeded from a tuple of keys, e.g. (seed, sample, patch, step), so
/// draws never depend on which worker handles a patch.
std::mt19937_64 keyed_engine(std::initializer_list<std::uint64_t> keys);

void fill_normal(std::span<double> out, std::mt19937_64& engine, double stddev = 1.0);

}  // namespace specdiff
