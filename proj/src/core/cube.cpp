#include "specdiff/core/cube.hpp"

#include "specdiff/core/error.hpp"

namespace specdiff {

HsiCube::HsiCube(std::size_t height, std::size_t width, SpectralGrid grid)
    : grid_(std::move(grid)), values_(height, width, grid_.size()) {
  require(!grid_.empty(), "HsiCube needs a non-empty spectral grid");
}

HsiCube::HsiCube(SpectralGrid grid, Array3 values) : grid_(std::move(grid)), values_(std::move(values)) {
  require(!grid_.empty(), "HsiCube needs a non-empty spectral grid");
  require(values_.channels() == grid_.size(), "HsiCube band count does not match its spectral grid");
}

Measurement::Measurement(std::size_t height, std::size_t width, std::size_t channels)
    : values_(height, width, channels) {
  require(channels >= 1 && channels <= 3, "measurements have 1 to 3 channels");
}

Measurement::Measurement(Array3 values) : values_(std::move(values)) {
  require(values_.channels() >= 1 && values_.channels() <= 3, "measurements have 1 to 3 channels");
}

}  // namespace specdiff
