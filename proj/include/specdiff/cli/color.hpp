#pragma once

#include <array>

#include "specdiff/core/array3.hpp"
#include "specdiff/core/cube.hpp"
#include "specdiff/core/spectral_grid.hpp"

namespace specdiff {

/// CIE 1931 2-degree color matching functions (multi-lobe Gaussian fit).
std::array<double, 3> cie_xyz(double wavelength_nm);

/// Display RGB in [0, 1]: CMF integration over the grid, XYZ to linear sRGB,
/// negatives clipped, divided by the image maximum, then gamma 2.2.
/// Intended for grids inside 380-780 nm.
Array3 rgb_project(const SpectralGrid& grid, const Array3& cube);
inline Array3 rgb_project(const HsiCube& x) { return rgb_project(x.grid(), x.values()); }

}  // namespace specdiff
