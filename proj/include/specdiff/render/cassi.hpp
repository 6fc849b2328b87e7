#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "specdiff/render/operator.hpp"

namespace specdiff {

/// Coded-aperture snapshot spectral imager geometry: a binary mask on the
/// H x W scene, then band c shifted right by shears[c] columns. The
/// measurement is H x (W + max shear) x 1.
struct CassiSpec {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> mask;  // row-major H x W
  std::vector<int> shears;         // one per band, >= 0, increasing

  std::size_t bands() const { return shears.size(); }
  std::size_t max_shear() const;
  std::size_t measurement_width() const { return width + max_shear(); }
  void validate() const;

  friend bool operator==(const CassiSpec&, const CassiSpec&) = default;
};

/// Random 50%-density mask with per-band shear `step * c`.
CassiSpec default_cassi(std::size_t height, std::size_t width, std::size_t bands, int step = 1,
                        std::uint64_t seed = 7);

/// y(u, v) = sum_c mask(u, v - d_c) * x(u, v - d_c, c)
Measurement render_cassi(const HsiCube& x, const CassiSpec& spec);

/// Stack of W-wide crops, band c starting at column d_c. H x W x C.
Array3 deshear(const Measurement& y, const CassiSpec& spec);

class CassiOperator final : public MeasurementOperator {
 public:
  CassiOperator(CassiSpec spec, SpectralGrid grid);

  const SpectralGrid& grid() const override { return grid_; }
  std::size_t scene_height() const override { return spec_.height; }
  std::size_t scene_width() const override { return spec_.width; }
  std::size_t measurement_height() const override { return spec_.height; }
  std::size_t measurement_width() const override { return spec_.measurement_width(); }
  std::size_t measurement_channels() const override { return 1; }

  Measurement apply(const HsiCube& x) const override;
  HsiCube adjoint(const Measurement& y) const override;
  Rect footprint(const Rect& region) const override;
  void apply_region(const Array3& values, const Rect& region, Array3& out) const override;
  void adjoint_region(const Array3& residual, const Rect& region, Array3& grad) const override;
  Array3 conditioning(const Measurement& y) const override { return deshear(y, spec_); }

  const CassiSpec& spec() const { return spec_; }

 private:
  CassiSpec spec_;
  SpectralGrid grid_;
};

/// "CAS1", u32 H, W, C, C i32 shears, H*W u8 mask.
void write_cassi(const std::filesystem::path& path, const CassiSpec& spec);
CassiSpec read_cassi(const std::filesystem::path& path);

}  // namespace specdiff
