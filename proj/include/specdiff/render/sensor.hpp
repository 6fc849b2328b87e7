#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "specdiff/core/spectral_grid.hpp"

namespace specdiff {

/// Spectral responses o_s(lambda) of S sensor channels, row-major S x C.
class SensorResponse {
 public:
  SensorResponse(SpectralGrid grid, std::size_t channels, std::vector<double> weights);

  /// Filterless photosensor, o(lambda) = 1.
  static SensorResponse panchromatic(const SpectralGrid& grid);
  /// Smooth Gaussian R, G, B responses centered at 610, 540 and 470 nm.
  static SensorResponse rgb(const SpectralGrid& grid, double sigma_nm = 35.0);

  const SpectralGrid& grid() const { return grid_; }
  std::size_t channels() const { return channels_; }
  std::size_t bands() const { return grid_.size(); }
  double weight(std::size_t s, std::size_t band) const { return weights_[s * grid_.size() + band]; }

  friend bool operator==(const SensorResponse&, const SensorResponse&) = default;

 private:
  SpectralGrid grid_;
  std::size_t channels_;
  std::vector<double> weights_;
};

/// "SNS1", u32 S, C, C f32 wavelengths, S*C f32 weights.
void write_sensor(const std::filesystem::path& path, const SensorResponse& sensor);
SensorResponse read_sensor(const std::filesystem::path& path);

}  // namespace specdiff
