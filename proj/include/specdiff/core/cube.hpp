#pragma once

#include <cstddef>
#include <utility>

#include "specdiff/core/array3.hpp"
#include "specdiff/core/spectral_grid.hpp"

namespace specdiff {

/// Hyperspectral radiance cube, H x W x C over a SpectralGrid.
class HsiCube {
 public:
  HsiCube() = default;
  HsiCube(std::size_t height, std::size_t width, SpectralGrid grid);
  HsiCube(SpectralGrid grid, Array3 values);

  std::size_t height() const { return values_.rows(); }
  std::size_t width() const { return values_.cols(); }
  std::size_t bands() const { return values_.channels(); }
  const SpectralGrid& grid() const { return grid_; }

  double& operator()(std::size_t r, std::size_t c, std::size_t b) { return values_(r, c, b); }
  double operator()(std::size_t r, std::size_t c, std::size_t b) const { return values_(r, c, b); }

  Array3& values() { return values_; }
  const Array3& values() const { return values_; }

  friend bool operator==(const HsiCube&, const HsiCube&) = default;

 private:
  SpectralGrid grid_;
  Array3 values_;
};

/// Sensor image, H x W x S with S = 1 (panchromatic) or 3 (RGB). CASSI
/// measurements are wider than the scene they encode.
class Measurement {
 public:
  Measurement() = default;
  Measurement(std::size_t height, std::size_t width, std::size_t channels);
  explicit Measurement(Array3 values);

  std::size_t height() const { return values_.rows(); }
  std::size_t width() const { return values_.cols(); }
  std::size_t channels() const { return values_.channels(); }

  double& operator()(std::size_t r, std::size_t c, std::size_t s) { return values_(r, c, s); }
  double operator()(std::size_t r, std::size_t c, std::size_t s) const { return values_(r, c, s); }

  Array3& values() { return values_; }
  const Array3& values() const { return values_; }

  friend bool operator==(const Measurement&, const Measurement&) = default;

 private:
  Array3 values_;
};

}  // namespace specdiff
