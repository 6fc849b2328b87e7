#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "specdiff/core/array3.hpp"
#include "specdiff/core/cube.hpp"
#include "specdiff/core/patch.hpp"
#include "specdiff/diffusion/denoiser.hpp"
#include "specdiff/diffusion/schedule.hpp"
#include "specdiff/guidance/gram.hpp"
#include "specdiff/render/operator.hpp"

namespace specdiff {

enum class GradientMode {
  kFrozen,   // eps held fixed; differentiate only the affine x0 estimate
  kFullVjp,  // also differentiate through the denoiser
};

struct GuidanceConfig {
  std::size_t loops = 10;
  double step_size = 1.0;
  std::size_t samples = 10;
  GradientMode mode = GradientMode::kFrozen;
  /// Solve per-patch scales; off means c = 1 everywhere.
  bool rescale = true;
  bool clamp_scales = false;
  /// (1 / sigma^2) ||y_hat - y||^2 + tv_weight * TV(y_hat) instead of ||y_hat - y||^2.
  bool noise_aware = false;
  double tv_weight = 1e2;
  double noise_sigma = 0.0;
  /// Loop count used when noise-aware guidance is switched on.
  static constexpr std::size_t kNoiseAwareLoops = 4;
  void validate() const;
};

/// Isotropic total variation, forward differences with mirror ("reflect")
/// boundary, summed over pixels and channels.
double total_variation(const Array3& img);
/// Gradient of total_variation; zero where the local difference vanishes.
Array3 total_variation_grad(const Array3& img);

/// Everything a guided sampler needs about one measurement.
class GuidanceProblem {
 public:
  GuidanceProblem(const MeasurementOperator& op, const Denoiser& denoiser, const DiffusionSchedule& schedule,
                  PatchLayout layout, GuidanceConfig config);

  const MeasurementOperator& op() const { return op_; }
  const Denoiser& denoiser() const { return denoiser_; }
  const DiffusionSchedule& schedule() const { return schedule_; }
  const PatchLayout& layout() const { return layout_; }
  const GuidanceConfig& config() const { return config_; }

  /// Conditioning patches for y in the denoiser's domain.
  std::vector<Array3> conditioning(const Measurement& y) const;
  /// Physical radiance of a model-domain patch (before the per-patch scale).
  Array3 to_physical(const Array3& model_patch) const;
  /// Renders of each patch's owned region.
  PatchResponses responses(const std::vector<Array3>& physical) const;
  /// Per-patch least-squares scales (all ones when rescaling is off).
  std::vector<double> solve_scales(const PatchResponses& responses, const Measurement& y) const;
  /// y_hat = sum_i c_i M_i.
  Measurement assemble(const PatchResponses& responses, const std::vector<double>& scales) const;
  /// Guidance loss of y_hat and its gradient with respect to y_hat.
  double loss(const Measurement& y_hat, const Measurement& y, Measurement* grad) const;

  struct Evaluation {
    double loss = 0.0;
    std::vector<double> scales;
    std::vector<Array3> gradient;  // d loss / d x_t per patch
  };
  /// Loss at x_t (eps given per patch, or recomputed when empty) with c
  /// solved at the current estimate, or taken from `fixed_scales`, and then
  /// held constant for the gradient.
  Evaluation evaluate(const std::vector<Array3>& x_t, std::size_t t, const std::vector<Array3>& cond,
                      const std::vector<Array3>& eps, const Measurement& y,
                      const std::vector<double>* fixed_scales = nullptr) const;

 private:
  const MeasurementOperator& op_;
  const Denoiser& denoiser_;
  const DiffusionSchedule& schedule_;
  PatchLayout layout_;
  GuidanceConfig config_;
};

/// Isolated renders of each patch's owned region (patches in physical units).
PatchResponses render_patches(const MeasurementOperator& op, const PatchLayout& layout,
                              const std::vector<Array3>& physical);

/// Physical-domain least-squares scales for a set of patches; inactive
/// patches get 1.
std::vector<double> solve_scales(const PatchSet& physical, const Measurement& y, const MeasurementOperator& op);

/// x - step * g / ||g||, with the norm taken over every patch; identity when
/// ||g|| < 1e-12.
void guided_update(std::vector<Array3>& x, const std::vector<Array3>& gradient, double step_size);

struct Reconstruction {
  HsiCube mean;
  std::vector<HsiCube> samples;
  Array3 uncertainty;                        // H x W x 1, empty for one sample
  std::vector<std::vector<double>> scales;   // final c per sample
  std::vector<double> residuals;             // ||M(x0) - y|| per sample
};

/// Guided patch-wise DDIM sampling of `config.samples` reconstructions.
Reconstruction reconstruct(const Measurement& y, const GuidanceProblem& problem, std::uint64_t seed);

/// Per-pixel sum over bands of the unbiased variance across samples.
Array3 uncertainty(const std::vector<HsiCube>& samples);

}  // namespace specdiff
