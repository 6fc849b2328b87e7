#include "specdiff/saliency/saliency.hpp"

#include <cmath>
#include <random>

#include "specdiff/core/error.hpp"
#include "specdiff/core/parallel.hpp"
#include "specdiff/core/patch.hpp"
#include "specdiff/core/rng.hpp"

namespace specdiff {

namespace {

void check_patch(const Denoiser& d, const Array3& y) {
  const PatchShape s = d.shape();
  require(y.rows() == s.size && y.cols() == s.size && y.channels() == s.cond_channels,
          "conditioning patch does not match the denoiser");
}

}  // namespace

Array3 deterministic_sample(const Denoiser& denoiser, const DiffusionSchedule& schedule, const Array3& y_patch,
                            std::uint64_t seed) {
  if (schedule.ddim_eta() != 0.0) throw ConfigError("saliency needs deterministic DDIM sampling (eta = 0)");
  check_patch(denoiser, y_patch);
  const PatchShape s = denoiser.shape();
  const PatchDomain domain = denoiser.domain();
  const Array3 cond = domain == PatchDomain::kNormalized ? normalize_patch(y_patch, ZeroPatchPolicy::kPassThrough)
                                                         : y_patch;
  auto rng = keyed_engine({seed, 0x73616cULL});
  std::normal_distribution<double> n01;
  Array3 x(s.size, s.size, s.bands);
  for (double& v : x.flat()) v = n01(rng);
  const auto& steps = schedule.steps();
  for (std::size_t k = steps.size(); k-- > 0;) {
    const std::size_t t = steps[k], t_prev = k ? steps[k - 1] : 0;
    x = ddim_step(x, denoiser.predict_eps(x, t, cond), t, t_prev, schedule, rng);
  }
  for (double& v : x.flat()) v = to_physical(domain, v);
  return x;
}

Array3 saliency_map(const Denoiser& denoiser, const DiffusionSchedule& schedule, const Array3& y_patch,
                    std::size_t ref_row, std::size_t ref_col, std::uint64_t seed) {
  const std::size_t P = denoiser.shape().size;
  require(ref_row < P && ref_col < P, "reference pixel outside the patch");
  const Array3 base = deterministic_sample(denoiser, schedule, y_patch, seed);
  const std::size_t C = base.channels(), S = y_patch.channels();
  Array3 map(P, P, 1);
  parallel_for(P * P, [&](std::size_t idx) {
    const std::size_t i = idx / P, j = idx % P;
    double dy = 0.0;
    for (std::size_t s = 0; s < S; ++s) dy += std::abs(y_patch(i, j, s));
    if (dy == 0.0) return;
    Array3 y = y_patch;
    for (std::size_t s = 0; s < S; ++s) y(i, j, s) = 0.0;
    const Array3 x0 = deterministic_sample(denoiser, schedule, y, seed);
    double dx = 0.0;
    for (std::size_t c = 0; c < C; ++c) dx += std::abs(x0(ref_row, ref_col, c) - base(ref_row, ref_col, c));
    map(i, j, 0) = dx / dy;
  });
  return map;
}

Array3 saliency_map(const Denoiser& denoiser, const DiffusionSchedule& schedule, const std::vector<Array3>& patches,
                    std::size_t ref_row, std::size_t ref_col, std::uint64_t seed) {
  require(!patches.empty(), "saliency needs at least one patch");
  const std::size_t P = denoiser.shape().size;
  Array3 total(P, P, 1);
  for (const Array3& p : patches) {
    const Array3 m = saliency_map(denoiser, schedule, p, ref_row, ref_col, seed);
    for (std::size_t k = 0; k < total.size(); ++k) total.data()[k] += m.data()[k];
  }
  for (double& v : total.flat()) v /= static_cast<double>(patches.size());
  return total;
}

std::vector<Array3> random_patches(const Array3& image, std::size_t P, std::size_t count, std::uint64_t seed) {
  require(P > 0 && image.rows() >= P && image.cols() >= P, "image smaller than the patch");
  auto rng = keyed_engine({seed, 0x637270ULL});
  std::uniform_int_distribution<std::size_t> rr(0, image.rows() - P), cc(0, image.cols() - P);
  std::vector<Array3> out;
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t r0 = rr(rng), c0 = cc(rng);
    Array3 p(P, P, image.channels());
    for (std::size_t r = 0; r < P; ++r)
      for (std::size_t c = 0; c < P; ++c)
        for (std::size_t k = 0; k < image.channels(); ++k) p(r, c, k) = image(r0 + r, c0 + c, k);
    out.push_back(std::move(p));
  }
  return out;
}

SpectralPsf saliency_as_psf(const Array3& map, double wavelength_nm, double pixel_pitch_um) {
  require(map.channels() == 1 && map.rows() == map.cols(), "saliency map must be square with one channel");
  return SpectralPsf(SpectralGrid({wavelength_nm}), map, pixel_pitch_um);
}

}  // namespace specdiff
