#pragma once

#include <cstddef>

#include "specdiff/core/array3.hpp"
#include "specdiff/core/cube.hpp"
#include "specdiff/core/patch.hpp"
#include "specdiff/core/spectral_grid.hpp"

namespace specdiff {

/// Linear measurement operator M mapping an H x W x C scene to a sensor image.
///
/// Besides whole-image application, an operator renders a single scene
/// region in isolation. That is what lets guidance build per-patch responses
/// and gradients without touching the full field: a region only reaches the
/// measurement pixels inside its footprint.
class MeasurementOperator {
 public:
  virtual ~MeasurementOperator() = default;

  virtual const SpectralGrid& grid() const = 0;
  virtual std::size_t scene_height() const = 0;
  virtual std::size_t scene_width() const = 0;
  virtual std::size_t measurement_height() const = 0;
  virtual std::size_t measurement_width() const = 0;
  virtual std::size_t measurement_channels() const = 0;

  virtual Measurement apply(const HsiCube& x) const = 0;
  virtual HsiCube adjoint(const Measurement& y) const = 0;

  /// Measurement pixels reachable from `region`, clipped to the sensor.
  virtual Rect footprint(const Rect& region) const = 0;
  /// Render `values` (region-sized, C bands) alone; `out` is footprint-sized.
  virtual void apply_region(const Array3& values, const Rect& region, Array3& out) const = 0;
  /// Adjoint of apply_region: footprint-sized `residual` to region-sized `grad`.
  virtual void adjoint_region(const Array3& residual, const Rect& region, Array3& grad) const = 0;

  /// Scene-aligned image the patch model is conditioned on (H x W x S').
  virtual Array3 conditioning(const Measurement& y) const = 0;
};

}  // namespace specdiff
