#include "specdiff/cli/color.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "specdiff/core/error.hpp"

namespace specdiff {

namespace {

double lobe(double x, double mu, double s_lo, double s_hi) {
  const double t = (x - mu) / (x < mu ? s_lo : s_hi);
  return std::exp(-0.5 * t * t);
}

constexpr double kXyzToRgb[3][3] = {
    {3.2406, -1.5372, -0.4986}, {-0.9689, 1.8758, 0.0415}, {0.0557, -0.2040, 1.0570}};

}  // namespace

std::array<double, 3> cie_xyz(double l) {
  return {1.056 * lobe(l, 599.8, 37.9, 31.0) + 0.362 * lobe(l, 442.0, 16.0, 26.7) - 0.065 * lobe(l, 501.1, 20.4, 26.2),
          0.821 * lobe(l, 568.8, 46.9, 40.5) + 0.286 * lobe(l, 530.9, 16.3, 31.1),
          1.217 * lobe(l, 437.0, 11.8, 36.0) + 0.681 * lobe(l, 459.0, 26.0, 13.8)};
}

Array3 rgb_project(const SpectralGrid& grid, const Array3& cube) {
  const std::size_t C = grid.size();
  require(cube.channels() == C, "cube bands do not match the grid");
  // Trapezoid weights; a single band gets weight 1.
  std::vector<double> dl(C, 1.0);
  if (C > 1)
    for (std::size_t k = 0; k < C; ++k) {
      const double lo = grid[k == 0 ? 0 : k - 1], hi = grid[k + 1 == C ? k : k + 1];
      dl[k] = 0.5 * (hi - lo);
    }
  std::vector<std::array<double, 3>> rgb_weight(C);
  for (std::size_t k = 0; k < C; ++k) {
    const auto xyz = cie_xyz(grid[k]);
    for (int c = 0; c < 3; ++c)
      rgb_weight[k][c] = dl[k] * (kXyzToRgb[c][0] * xyz[0] + kXyzToRgb[c][1] * xyz[1] + kXyzToRgb[c][2] * xyz[2]);
  }
  Array3 out(cube.rows(), cube.cols(), 3);
  for (std::size_t r = 0; r < cube.rows(); ++r)
    for (std::size_t c = 0; c < cube.cols(); ++c)
      for (int s = 0; s < 3; ++s) {
        double v = 0.0;
        for (std::size_t k = 0; k < C; ++k) v += rgb_weight[k][s] * cube(r, c, k);
        out(r, c, s) = std::max(v, 0.0);
      }
  const double m = out.empty() ? 0.0 : out.max();
  if (m > 0.0)
    for (double& v : out.flat()) v = std::pow(v / m, 1.0 / 2.2);
  return out;
}

}  // namespace specdiff
