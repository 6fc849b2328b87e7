#include "specdiff/render/reference.hpp"

#include "specdiff/core/error.hpp"

namespace specdiff::reference {

Measurement render_direct(const HsiCube& x, const SpectralPsf& psf, const SensorResponse& sensor) {
  require(x.bands() == psf.bands() && x.bands() == sensor.bands(), "band counts differ");
  const auto H = static_cast<std::ptrdiff_t>(x.height()), W = static_cast<std::ptrdiff_t>(x.width());
  const auto K = static_cast<std::ptrdiff_t>(psf.size());
  const std::size_t S = sensor.channels(), C = x.bands();
  Measurement y(x.height(), x.width(), S);
  // Impulse at (r, c) lands at (r + a - K/2, c + b - K/2) with weight f(a, b).
  for (std::ptrdiff_t u = 0; u < H; ++u)
    for (std::ptrdiff_t v = 0; v < W; ++v)
      for (std::ptrdiff_t a = 0; a < K; ++a) {
        const std::ptrdiff_t r = u - a + K / 2;
        if (r < 0 || r >= H) continue;
        for (std::ptrdiff_t b = 0; b < K; ++b) {
          const std::ptrdiff_t c = v - b + K / 2;
          if (c < 0 || c >= W) continue;
          for (std::size_t k = 0; k < C; ++k) {
            const double t = psf(static_cast<std::size_t>(a), static_cast<std::size_t>(b), k) *
                             x.values()(static_cast<std::size_t>(r), static_cast<std::size_t>(c), k);
            for (std::size_t s = 0; s < S; ++s)
              y.values()(static_cast<std::size_t>(u), static_cast<std::size_t>(v), s) += sensor.weight(s, k) * t;
          }
        }
      }
  return y;
}

HsiCube render_adjoint_direct(const Measurement& y, const SpectralPsf& psf, const SensorResponse& sensor) {
  require(y.channels() == sensor.channels() && psf.bands() == sensor.bands(), "channel counts differ");
  const auto H = static_cast<std::ptrdiff_t>(y.height()), W = static_cast<std::ptrdiff_t>(y.width());
  const auto K = static_cast<std::ptrdiff_t>(psf.size());
  const std::size_t S = sensor.channels(), C = psf.bands();
  HsiCube x(y.height(), y.width(), psf.grid());
  for (std::ptrdiff_t r = 0; r < H; ++r)
    for (std::ptrdiff_t c = 0; c < W; ++c)
      for (std::ptrdiff_t a = 0; a < K; ++a) {
        const std::ptrdiff_t u = r + a - K / 2;
        if (u < 0 || u >= H) continue;
        for (std::ptrdiff_t b = 0; b < K; ++b) {
          const std::ptrdiff_t v = c + b - K / 2;
          if (v < 0 || v >= W) continue;
          for (std::size_t k = 0; k < C; ++k) {
            double acc = 0.0;
            for (std::size_t s = 0; s < S; ++s)
              acc += sensor.weight(s, k) * y.values()(static_cast<std::size_t>(u), static_cast<std::size_t>(v), s);
            x.values()(static_cast<std::size_t>(r), static_cast<std::size_t>(c), k) +=
                psf(static_cast<std::size_t>(a), static_cast<std::size_t>(b), k) * acc;
          }
        }
      }
  return x;
}

}  // namespace specdiff::reference
