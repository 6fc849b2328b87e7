#include "specdiff/optics/metalens.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "specdiff/core/error.hpp"
#include "specdiff/core/rng.hpp"

namespace specdiff {

double target_phase(const FocusSpec& spec, double x_m, double y_m) {
  require(spec.distance_m > 0.0, "focus distance must be positive");
  require(spec.wavelength_nm > 0.0, "wavelength must be positive");
  const double d = spec.distance_m;
  const double du = spec.offset_u_m, dv = spec.offset_v_m;
  const double c = std::sqrt(d * d + du * du + dv * dv);
  const double dx = x_m - du, dy = y_m - dv;
  const double k = 2.0 * std::numbers::pi / (spec.wavelength_nm * 1e-9);
  return k * (c - std::sqrt(d * d + dx * dx + dy * dy));
}

double MetalensDesign::cell_x(std::size_t col) const {
  return (static_cast<double>(col) - 0.5 * static_cast<double>(cells - 1)) * cell_pitch_m;
}

double MetalensDesign::cell_y(std::size_t row) const {
  return (static_cast<double>(row) - 0.5 * static_cast<double>(cells - 1)) * cell_pitch_m;
}

MetalensDesign optimize_radii(const FocusSpec& spec, const NanocylinderTable& table, std::size_t cells,
                              double cell_pitch_m) {
  require(cells > 0, "aperture needs at least one cell");
  require(cell_pitch_m > 0.0, "cell pitch must be positive");
  require(spec.distance_m > 0.0, "focus distance must be positive");
  if (!table.covers(spec.wavelength_nm)) throw ConfigError("design wavelength outside the nanocylinder table");

  const auto gamma = table.responses_at(spec.wavelength_nm);
  MetalensDesign design{cells, cell_pitch_m, std::vector<double>(cells * cells)};
  const auto& radii = table.radii_nm();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(cells);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t row = 0; row < n; ++row) {
    const double y = design.cell_y(static_cast<std::size_t>(row));
    for (std::size_t col = 0; col < cells; ++col) {
      const std::complex<double> want = std::polar(1.0, target_phase(spec, design.cell_x(col), y));
      std::size_t best = 0;
      double best_err = std::norm(gamma[0] - want);
      for (std::size_t r = 1; r < gamma.size(); ++r) {
        const double err = std::norm(gamma[r] - want);
        if (err < best_err) {
          best_err = err;
          best = r;
        }
      }
      design.radius_nm[static_cast<std::size_t>(row) * cells + col] = radii[best];
    }
  }
  return design;
}

std::vector<SelectionMask> make_masks(MaskKind kind, std::size_t count, std::size_t cells, std::uint64_t seed) {
  require(count >= 1, "need at least one mask");
  require(cells >= 1, "aperture needs at least one cell");
  std::vector<SelectionMask> masks(count, SelectionMask{cells, kind, std::vector<std::uint8_t>(cells * cells, 0)});
  if (kind == MaskKind::kAngular) {
    const double center = 0.5 * static_cast<double>(cells - 1);
    const double sector = 2.0 * std::numbers::pi / static_cast<double>(count);
    for (std::size_t r = 0; r < cells; ++r) {
      for (std::size_t c = 0; c < cells; ++c) {
        double a = std::atan2(static_cast<double>(r) - center, static_cast<double>(c) - center);
        if (a < 0) a += 2.0 * std::numbers::pi;
        std::size_t j = static_cast<std::size_t>(a / sector);
        if (j >= count) j = count - 1;
        masks[j].values[r * cells + c] = 1;
      }
    }
  } else {
    auto engine = keyed_engine({seed, count, cells});
    std::uniform_int_distribution<std::size_t> pick(0, count - 1);
    for (std::size_t i = 0; i < cells * cells; ++i) masks[pick(engine)].values[i] = 1;
  }
  return masks;
}

MetalensDesign multiplex(const std::vector<MetalensDesign>& lenses, const std::vector<SelectionMask>& masks) {
  require(!lenses.empty(), "multiplex needs at least one lens");
  require(lenses.size() == masks.size(), "one selection mask per lens");
  const std::size_t cells = lenses.front().cells;
  for (const auto& l : lenses) {
    require(l.cells == cells && l.radius_nm.size() == cells * cells, "lenses must share the aperture grid");
    require(l.cell_pitch_m == lenses.front().cell_pitch_m, "lenses must share the cell pitch");
  }
  for (const auto& m : masks) require(m.cells == cells && m.values.size() == cells * cells, "mask size mismatch");

  MetalensDesign out{cells, lenses.front().cell_pitch_m, std::vector<double>(cells * cells)};
  for (std::size_t i = 0; i < cells * cells; ++i) {
    std::size_t owner = masks.size();
    for (std::size_t j = 0; j < masks.size(); ++j) {
      const auto v = masks[j].values[i];
      require(v <= 1, "selection masks must be binary");
      if (v == 1) {
        require(owner == masks.size(), "selection masks overlap");
        owner = j;
      }
    }
    require(owner < masks.size(), "selection masks do not cover the aperture");
    out.radius_nm[i] = lenses[owner].radius_nm[i];
  }
  return out;
}

}  // namespace specdiff
