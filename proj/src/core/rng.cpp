#include "specdiff/core/rng.hpp"

#include <vector>

namespace specdiff {

std::mt19937_64 keyed_engine(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * keys.size() + 1);
  words.push_back(0x5eed5eedu);
  for (std::uint64_t k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

void fill_normal(std::span<double> out, std::mt19937_64& engine, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : out) v = dist(engine);
}

}  // namespace specdiff
