#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "specdiff/core/spectral_grid.hpp"
#include "specdiff/optics/metalens.hpp"
#include "specdiff/optics/nanocylinder.hpp"
#include "specdiff/optics/psf.hpp"

namespace specdiff {

/// Sampled complex field on a square grid centered on the optical axis.
struct OpticalField {
  std::size_t size = 0;
  double pitch_m = 0.0;
  std::vector<std::complex<double>> values;  // row-major
};

/// Single-FFT Fresnel propagation of `aperture` over `distance_m`:
/// the field is premultiplied by the input chirp, zero-padded to
/// `fft_size`, transformed, and multiplied by the output chirp and
/// exp(ikd) / (i lambda d). Output pitch is lambda d / (fft_size * pitch).
/// The aperture must satisfy pitch <= lambda d / (aperture width).
OpticalField fresnel_propagate(const OpticalField& aperture, double wavelength_nm, double distance_m,
                               std::size_t fft_size);

/// Power carried by a field, sum |U|^2 * pitch^2.
double field_power(const OpticalField& field);

struct FresnelConfig {
  double distance_m = 0.01;
  double sensor_pitch_m = 5e-6;
  std::size_t kernel_size = 64;
  /// Design cells averaged into one propagation sample per axis.
  std::size_t cell_binning = 8;
  /// Odd number of propagation samples per sensor pixel per axis.
  std::size_t oversample = 1;
  bool normalize = true;
};

/// Aperture field Gamma(radius map, lambda) sampled at cell_binning * cell pitch.
OpticalField aperture_field(const MetalensDesign& design, const NanocylinderTable& table, double wavelength_nm,
                            std::size_t cell_binning);

/// Intensity PSF of a composite lens for every band of `grid`, binned to the
/// sensor pitch and center-cropped to K x K. With `normalize`, the cube sums to one.
SpectralPsf fresnel_psf(const MetalensDesign& design, const NanocylinderTable& table, const SpectralGrid& grid,
                        const FresnelConfig& config = {});

}  // namespace specdiff
