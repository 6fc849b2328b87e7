#include "specdiff/cli/lens_presets.hpp"

#include <cmath>
#include <numbers>

#include "specdiff/core/error.hpp"

namespace specdiff {

LensPreset parse_lens_preset(const std::string& name) {
  if (name == "AIF") return LensPreset::kAif;
  if (name == "L1") return LensPreset::kL1;
  if (name == "L2") return LensPreset::kL2;
  if (name == "L4") return LensPreset::kL4;
  if (name == "L4S") return LensPreset::kL4S;
  if (name == "L8S") return LensPreset::kL8S;
  throw ConfigError("unknown lens preset: " + name);
}

std::string preset_name(LensPreset p) {
  switch (p) {
    case LensPreset::kAif: return "AIF";
    case LensPreset::kL1: return "L1";
    case LensPreset::kL2: return "L2";
    case LensPreset::kL4: return "L4";
    case LensPreset::kL4S: return "L4S";
    case LensPreset::kL8S: return "L8S";
  }
  return "?";
}

LensRecipe lens_recipe(LensPreset preset, const LensOptions& o) {
  const double d = o.fresnel.distance_m;
  const auto on_axis = [d](std::vector<double> wavelengths) {
    std::vector<FocusSpec> out;
    for (double l : wavelengths) out.push_back({l, d, 0.0, 0.0});
    return out;
  };
  // Lens j focuses off-axis toward the middle of its own angular sector.
  const auto sheared = [&](std::vector<double> wavelengths) {
    std::vector<FocusSpec> out;
    const double n = static_cast<double>(wavelengths.size());
    for (std::size_t j = 0; j < wavelengths.size(); ++j) {
      const double a = (static_cast<double>(j) + 0.5) * 2.0 * std::numbers::pi / n;
      out.push_back({wavelengths[j], d, o.shift_m * std::cos(a), o.shift_m * std::sin(a)});
    }
    return out;
  };
  switch (preset) {
    case LensPreset::kAif: return {};
    case LensPreset::kL1: return {on_axis({532.0}), MaskKind::kRandomInterleave};
    case LensPreset::kL2: return {on_axis({470.0, 610.0}), MaskKind::kRandomInterleave};
    case LensPreset::kL4: return {on_axis({450.0, 510.0, 570.0, 630.0}), MaskKind::kRandomInterleave};
    case LensPreset::kL4S: return {sheared({450.0, 510.0, 570.0, 630.0}), MaskKind::kAngular};
    case LensPreset::kL8S:
      return {sheared({440.0, 470.0, 500.0, 530.0, 560.0, 590.0, 620.0, 650.0}), MaskKind::kAngular};
  }
  return {};
}

MetalensDesign design_metalens(LensPreset preset, const NanocylinderTable& table, const LensOptions& o) {
  const LensRecipe recipe = lens_recipe(preset, o);
  if (recipe.lenses.empty()) throw ConfigError("the all-in-focus preset has no metalens design");
  std::vector<MetalensDesign> lenses;
  for (const FocusSpec& f : recipe.lenses) lenses.push_back(optimize_radii(f, table, o.cells, o.cell_pitch_m));
  if (lenses.size() == 1) return lenses.front();
  return multiplex(lenses, make_masks(recipe.masks, lenses.size(), o.cells, o.seed));
}

SpectralPsf design_lens(LensPreset preset, const SpectralGrid& grid, const NanocylinderTable& table,
                        const LensOptions& o) {
  if (preset == LensPreset::kAif) return ideal_psf(grid, o.fresnel.kernel_size, o.fresnel.sensor_pitch_m * 1e6);
  return fresnel_psf(design_metalens(preset, table, o), table, grid, o.fresnel);
}

}  // namespace specdiff
