#pragma once

#include <cstdint>
#include <optional>

#include "specdiff/core/cube.hpp"

namespace specdiff {

/// Additive Gaussian sensor noise. When `snr` is set, sigma = mean(y) / snr.
struct NoiseSpec {
  std::optional<double> snr;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

double noise_sigma(const Measurement& y, const NoiseSpec& spec);

/// max(y + N(0, sigma^2), 0), element-wise, reproducible for a given seed.
Measurement add_noise(const Measurement& y, const NoiseSpec& spec);

}  // namespace specdiff
