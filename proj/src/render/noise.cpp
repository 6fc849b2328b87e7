#include "specdiff/render/noise.hpp"

#include <algorithm>
#include <cmath>

#include "specdiff/core/error.hpp"
#include "specdiff/core/rng.hpp"

namespace specdiff {

double noise_sigma(const Measurement& y, const NoiseSpec& spec) {
  if (!spec.snr) {
    require(std::isfinite(spec.sigma) && spec.sigma >= 0.0, "noise sigma must be >= 0");
    return spec.sigma;
  }
  require(std::isfinite(*spec.snr) && *spec.snr > 0.0, "SNR must be > 0");
  const double mean = y.values().sum() / static_cast<double>(y.values().size());
  return mean / *spec.snr;
}

Measurement add_noise(const Measurement& y, const NoiseSpec& spec) {
  const double sigma = noise_sigma(y, spec);
  Measurement out = y;
  if (sigma == 0.0) return out;
  auto engine = keyed_engine({spec.seed, 0x6e6f697365ULL});
  std::vector<double> n(out.values().size());
  fill_normal(n, engine, sigma);
  auto v = out.values().flat();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(v[i] + n[i], 0.0);
  return out;
}

}  // namespace specdiff
