#pragma once

#include <cstddef>
#include <filesystem>

#include "specdiff/core/array3.hpp"
#include "specdiff/core/spectral_grid.hpp"

namespace specdiff {

/// Per-wavelength intensity kernels f(u, v, lambda), K x K x C. The focal
/// reference (zero displacement) sits at index (K/2, K/2).
class SpectralPsf {
 public:
  SpectralPsf() = default;
  SpectralPsf(SpectralGrid grid, Array3 kernels, double pixel_pitch_um);

  std::size_t size() const { return kernels_.rows(); }
  std::size_t center() const { return kernels_.rows() / 2; }
  std::size_t bands() const { return kernels_.channels(); }
  const SpectralGrid& grid() const { return grid_; }
  double pixel_pitch_um() const { return pitch_um_; }
  const Array3& kernels() const { return kernels_; }
  double operator()(std::size_t r, std::size_t c, std::size_t band) const { return kernels_(r, c, band); }

  /// Scale the whole cube so it sums to one; per-band ratios are preserved.
  void normalize_total();

  friend bool operator==(const SpectralPsf&, const SpectralPsf&) = default;

 private:
  SpectralGrid grid_;
  Array3 kernels_;
  double pitch_um_ = 5.0;
};

/// All-in-focus achromatic kernel: a unit impulse at (K/2, K/2) in every band.
SpectralPsf ideal_psf(const SpectralGrid& grid, std::size_t kernel_size, double pixel_pitch_um = 5.0);

/// "PSF1", u32 K, C, f32 pitch (um), C f32 wavelengths, K*K*C f32 intensities.
void write_psf(const std::filesystem::path& path, const SpectralPsf& psf);
SpectralPsf read_psf(const std::filesystem::path& path);

}  // namespace specdiff
