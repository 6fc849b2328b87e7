#pragma once

#include <cstddef>

#include "specdiff/core/array3.hpp"

namespace specdiff {

/// Patch tensor dimensions a denoiser works on.
struct PatchShape {
  std::size_t size = 0;        // P, patches are P x P
  std::size_t bands = 0;       // C
  std::size_t cond_channels = 0;  // channels of the conditioning patch
  std::size_t values() const { return size * size * bands; }
  friend bool operator==(const PatchShape&, const PatchShape&) = default;
};

/// How a denoiser's patch values relate to physical radiance.
///
/// Normalized models see max-normalized patches in [-1, 1]: conditioning
/// patches are normalized before use and a sample x maps to (x + 1) / 2 up
/// to the per-patch scale. Physical models work in scene units throughout.
enum class PatchDomain { kNormalized, kPhysical };

inline double to_physical(PatchDomain d, double x) { return d == PatchDomain::kNormalized ? 0.5 * (x + 1.0) : x; }
/// d(physical) / d(model value)
inline double physical_slope(PatchDomain d) { return d == PatchDomain::kNormalized ? 0.5 : 1.0; }

/// Noise predictor eps(x_t, t; y). Implementations must be deterministic and
/// safe to call concurrently.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual PatchShape shape() const = 0;
  virtual PatchDomain domain() const = 0;
  virtual Array3 predict_eps(const Array3& x_t, std::size_t t, const Array3& y_cond) const = 0;
  virtual bool has_vjp() const { return false; }
  /// Gradient of <eps(x_t, t; y), cotangent> with respect to x_t.
  virtual Array3 vjp(const Array3& x_t, std::size_t t, const Array3& y_cond, const Array3& cotangent) const;
};

}  // namespace specdiff
