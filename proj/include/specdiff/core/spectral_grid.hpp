#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace specdiff {

/// Band centers in nanometers, strictly increasing and positive.
class SpectralGrid {
 public:
  SpectralGrid() = default;
  explicit SpectralGrid(std::vector<double> wavelengths_nm);

  /// `count` evenly spaced bands from `first_nm` to `last_nm` inclusive.
  static SpectralGrid uniform(double first_nm, double last_nm, std::size_t count);

  std::size_t size() const { return wavelengths_.size(); }
  bool empty() const { return wavelengths_.empty(); }
  double operator[](std::size_t i) const { return wavelengths_[i]; }
  std::span<const double> wavelengths() const { return wavelengths_; }
  double front() const { return wavelengths_.front(); }
  double back() const { return wavelengths_.back(); }

  /// Same band count and centers within `tol_nm`.
  bool matches(const SpectralGrid& other, double tol_nm = 1e-3) const;

  friend bool operator==(const SpectralGrid&, const SpectralGrid&) = default;

 private:
  std::vector<double> wavelengths_;
};

}  // namespace specdiff
