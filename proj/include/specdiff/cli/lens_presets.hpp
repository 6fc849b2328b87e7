#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specdiff/optics/fresnel.hpp"
#include "specdiff/optics/metalens.hpp"
#include "specdiff/optics/nanocylinder.hpp"
#include "specdiff/optics/psf.hpp"

namespace specdiff {

enum class LensPreset { kAif, kL1, kL2, kL4, kL4S, kL8S };

/// "AIF", "L1", "L2", "L4", "L4S", "L8S"; anything else is a ConfigError.
LensPreset parse_lens_preset(const std::string& name);
std::string preset_name(LensPreset p);

struct LensOptions {
  std::size_t cells = 2000;
  double cell_pitch_m = 250e-9;
  /// Focal offset of each shifted intermediary lens, meters.
  double shift_m = 50e-6;
  std::uint64_t seed = 0;
  FresnelConfig fresnel;
};

/// Intermediary focusing conditions and the mask family of a preset.
struct LensRecipe {
  std::vector<FocusSpec> lenses;
  MaskKind masks = MaskKind::kAngular;
};
LensRecipe lens_recipe(LensPreset preset, const LensOptions& options);

/// Composite lens radius map for a preset (not defined for AIF).
MetalensDesign design_metalens(LensPreset preset, const NanocylinderTable& table, const LensOptions& options);

/// Spectral PSF of a preset over `grid`. AIF gives the ideal impulse kernel.
SpectralPsf design_lens(LensPreset preset, const SpectralGrid& grid, const NanocylinderTable& table,
                        const LensOptions& options);

}  // namespace specdiff
