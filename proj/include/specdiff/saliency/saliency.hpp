#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "specdiff/core/array3.hpp"
#include "specdiff/diffusion/denoiser.hpp"
#include "specdiff/diffusion/schedule.hpp"
#include "specdiff/optics/psf.hpp"

namespace specdiff {

/// Unguided deterministic DDIM run from a seeded x_T, returned in physical units.
Array3 deterministic_sample(const Denoiser& denoiser, const DiffusionSchedule& schedule, const Array3& y_patch,
                            std::uint64_t seed);

/// Perturbation saliency of output pixel (ref_row, ref_col) for one
/// conditioning patch (physical units, P x P x S). Entry (i, j) is
/// sum_lambda |x0(ref) - x0'(ref)| / sum_s |y(i, j, s)| where x0' is the
/// prediction with pixel (i, j) zeroed; 0 when that pixel is already zero.
/// Throws ConfigError when the schedule is stochastic.
Array3 saliency_map(const Denoiser& denoiser, const DiffusionSchedule& schedule, const Array3& y_patch,
                    std::size_t ref_row, std::size_t ref_col, std::uint64_t seed);

/// Mean of the single-patch maps over `patches`, same seed for each.
Array3 saliency_map(const Denoiser& denoiser, const DiffusionSchedule& schedule, const std::vector<Array3>& patches,
                    std::size_t ref_row, std::size_t ref_col, std::uint64_t seed);

/// `count` P x P crops of `image` at seeded uniform positions.
std::vector<Array3> random_patches(const Array3& image, std::size_t patch_size, std::size_t count, std::uint64_t seed);

constexpr std::size_t kSaliencyPatches = 20;

/// Single-band PSF container for a saliency map, tagged with one wavelength.
SpectralPsf saliency_as_psf(const Array3& map, double wavelength_nm, double pixel_pitch_um = 5.0);

}  // namespace specdiff
