#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "specdiff/optics/nanocylinder.hpp"

namespace specdiff {

/// Focusing condition for one intermediary lens. Lengths in meters.
struct FocusSpec {
  double wavelength_nm = 532.0;
  double distance_m = 0.01;
  double offset_u_m = 0.0;  // along x (columns)
  double offset_v_m = 0.0;  // along y (rows)
};

/// Phase (radians) that focuses `spec` from aperture point (x, y), in meters.
/// Maximal, (2 pi / lambda)(c - d), at (offset_u, offset_v).
double target_phase(const FocusSpec& spec, double x_m, double y_m);

/// Square grid of nanocylinder radii (nm), row-major, cells centered on the
/// optical axis with pitch `cell_pitch_m`.
struct MetalensDesign {
  std::size_t cells = 0;
  double cell_pitch_m = 250e-9;
  std::vector<double> radius_nm;

  double cell_x(std::size_t col) const;
  double cell_y(std::size_t row) const;
  double aperture_m() const { return static_cast<double>(cells) * cell_pitch_m; }
};

/// Per-cell brute-force minimum of |Gamma(r, lambda) - exp(i psi)|^2 over the
/// table's radius samples; ties go to the smallest radius.
MetalensDesign optimize_radii(const FocusSpec& spec, const NanocylinderTable& table, std::size_t cells,
                              double cell_pitch_m = 250e-9);

enum class MaskKind { kAngular, kRandomInterleave };

/// Binary cells x cells selection mask, row-major.
struct SelectionMask {
  std::size_t cells = 0;
  MaskKind kind = MaskKind::kAngular;
  std::vector<std::uint8_t> values;
};

/// `count` pairwise-disjoint masks summing to one everywhere. Angular masks
/// split the aperture into equal sectors around its center (sector 0 starts
/// at +x and proceeds counter-clockwise toward +y); random masks assign each
/// cell to a uniformly drawn lens.
std::vector<SelectionMask> make_masks(MaskKind kind, std::size_t count, std::size_t cells, std::uint64_t seed = 0);

/// Composite lens taking each cell's radius from the lens whose mask selects it.
MetalensDesign multiplex(const std::vector<MetalensDesign>& lenses, const std::vector<SelectionMask>& masks);

}  // namespace specdiff
