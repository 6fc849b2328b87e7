#include "specdiff/core/spectral_grid.hpp"

#include <cmath>

#include "specdiff/core/error.hpp"

namespace specdiff {

SpectralGrid::SpectralGrid(std::vector<double> wavelengths_nm) : wavelengths_(std::move(wavelengths_nm)) {
  require(!wavelengths_.empty(), "spectral grid needs at least one band");
  for (std::size_t i = 0; i < wavelengths_.size(); ++i) {
    require(std::isfinite(wavelengths_[i]) && wavelengths_[i] > 0.0, "wavelengths must be positive");
    if (i > 0) require(wavelengths_[i] > wavelengths_[i - 1], "wavelengths must be strictly increasing");
  }
}

SpectralGrid SpectralGrid::uniform(double first_nm, double last_nm, std::size_t count) {
  require(count >= 1, "spectral grid needs at least one band");
  if (count == 1) return SpectralGrid({first_nm});
  std::vector<double> w(count);
  const double step = (last_nm - first_nm) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) w[i] = first_nm + step * static_cast<double>(i);
  w.back() = last_nm;
  return SpectralGrid(std::move(w));
}

bool SpectralGrid::matches(const SpectralGrid& other, double tol_nm) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::abs(wavelengths_[i] - other.wavelengths_[i]) > tol_nm) return false;
  }
  return true;
}

}  // namespace specdiff
