#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "specdiff/core/fft.hpp"
#include "specdiff/optics/psf.hpp"
#include "specdiff/render/operator.hpp"
#include "specdiff/render/sensor.hpp"

namespace specdiff {

/// Shift-invariant spectral-PSF camera:
///   y_s(u, v) = sum_lambda o_s(lambda) * (f_lambda * x_lambda)(u, v)
/// True linear convolution with zero padding, cropped to the scene size.
/// Convolutions run through FFTs; kernel spectra are cached per FFT shape.
class PsfCamera final : public MeasurementOperator {
 public:
  PsfCamera(SpectralPsf psf, SensorResponse sensor, std::size_t height, std::size_t width);
  /// Copies start with an empty kernel-spectrum cache.
  PsfCamera(const PsfCamera& other) : PsfCamera(other.psf_, other.sensor_, other.height_, other.width_) {}
  PsfCamera& operator=(const PsfCamera&) = delete;

  const SpectralGrid& grid() const override { return psf_.grid(); }
  std::size_t scene_height() const override { return height_; }
  std::size_t scene_width() const override { return width_; }
  std::size_t measurement_height() const override { return height_; }
  std::size_t measurement_width() const override { return width_; }
  std::size_t measurement_channels() const override { return sensor_.channels(); }

  Measurement apply(const HsiCube& x) const override;
  HsiCube adjoint(const Measurement& y) const override;
  Rect footprint(const Rect& region) const override;
  void apply_region(const Array3& values, const Rect& region, Array3& out) const override;
  void adjoint_region(const Array3& residual, const Rect& region, Array3& grad) const override;
  Array3 conditioning(const Measurement& y) const override { return y.values(); }

  const SpectralPsf& psf() const { return psf_; }
  const SensorResponse& sensor() const { return sensor_; }

 private:
  using Spectra = std::vector<fft::ComplexBuffer>;
  const Spectra& kernel_spectra(std::size_t n0, std::size_t n1) const;
  // Linear convolution over a region; `parallel` spreads bands across workers.
  void forward(const Array3& values, const Rect& region, Array3& out, bool parallel) const;
  void backward(const Array3& residual, const Rect& region, Array3& grad, bool parallel) const;

  SpectralPsf psf_;
  SensorResponse sensor_;
  std::size_t height_, width_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Spectra>> cache_;
};

/// Render a cube through a spectral PSF and sensor response.
Measurement render(const HsiCube& x, const SpectralPsf& psf, const SensorResponse& sensor);

}  // namespace specdiff
