#include "specdiff/render/camera.hpp"

#include <algorithm>

#include "specdiff/core/error.hpp"

namespace specdiff {

namespace {

using fft::Complex;

Rect window_of(const Rect& region, std::size_t K) {
  const auto k = static_cast<std::ptrdiff_t>(K);
  return {region.row - k / 2, region.col - k / 2, region.height + k - 1, region.width + k - 1};
}

}  // namespace

PsfCamera::PsfCamera(SpectralPsf psf, SensorResponse sensor, std::size_t height, std::size_t width)
    : psf_(std::move(psf)), sensor_(std::move(sensor)), height_(height), width_(width) {
  require(height > 0 && width > 0, "camera needs a non-empty scene");
  if (!psf_.grid().matches(sensor_.grid())) throw ConfigError("PSF and sensor spectral grids differ");
}

const PsfCamera::Spectra& PsfCamera::kernel_spectra(std::size_t n0, std::size_t n1) const {
  std::lock_guard lock(cache_mutex_);
  auto& slot = cache_[{n0, n1}];
  if (!slot) {
    const auto& plan = fft::Plan2d::get(n0, n1);
    auto spectra = std::make_unique<Spectra>();
    const std::size_t K = psf_.size();
    fft::RealBuffer buf(plan.real_size());
    for (std::size_t b = 0; b < psf_.bands(); ++b) {
      buf.zero();
      for (std::size_t r = 0; r < K; ++r)
        for (std::size_t c = 0; c < K; ++c) buf[r * n1 + c] = psf_(r, c, b);
      fft::ComplexBuffer spec(plan.half_size());
      plan.forward(buf.data(), spec.data());
      spectra->push_back(std::move(spec));
    }
    slot = std::move(spectra);
  }
  return *slot;
}

Rect PsfCamera::footprint(const Rect& region) const {
  return window_of(region, psf_.size())
      .intersect({0, 0, static_cast<std::ptrdiff_t>(height_), static_cast<std::ptrdiff_t>(width_)});
}

void PsfCamera::forward(const Array3& values, const Rect& region, Array3& out, bool parallel) const {
  const std::size_t C = psf_.bands(), S = sensor_.channels(), K = psf_.size();
  require(values.rows() == static_cast<std::size_t>(region.height) &&
              values.cols() == static_cast<std::size_t>(region.width) && values.channels() == C,
          "region values do not match the region");
  const Rect win = window_of(region, K);
  const Rect foot = footprint(region);
  out = Array3(static_cast<std::size_t>(foot.height), static_cast<std::size_t>(foot.width), S);
  if (foot.empty()) return;

  const std::size_t n0 = fft::good_size(static_cast<std::size_t>(win.height));
  const std::size_t n1 = fft::good_size(static_cast<std::size_t>(win.width));
  const auto& plan = fft::Plan2d::get(n0, n1);
  const auto& kspec = kernel_spectra(n0, n1);
  const std::size_t half = plan.half_size();
  const std::size_t h = values.rows(), w = values.cols();

  // Per-band products kept separately so the band sum has a fixed order.
  std::vector<fft::ComplexBuffer> products(C);
  const auto bands = static_cast<std::ptrdiff_t>(C);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t bi = 0; bi < bands; ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    fft::RealBuffer buf(plan.real_size());
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) buf[r * n1 + c] = values(r, c, b);
    fft::ComplexBuffer spec(half);
    plan.forward(buf.data(), spec.data());
    for (std::size_t i = 0; i < half; ++i) spec[i] *= kspec[b][i];
    products[b] = std::move(spec);
  }

  const double inv_n = 1.0 / static_cast<double>(plan.real_size());
  const auto channels = static_cast<std::ptrdiff_t>(S);
#pragma omp parallel for schedule(static) if (parallel && S > 1)
  for (std::ptrdiff_t si = 0; si < channels; ++si) {
    const auto s = static_cast<std::size_t>(si);
    fft::ComplexBuffer acc(half);
    for (std::size_t b = 0; b < C; ++b) {
      const double o = sensor_.weight(s, b);
      if (o == 0.0) continue;
      for (std::size_t i = 0; i < half; ++i) acc[i] += o * products[b][i];
    }
    fft::RealBuffer img(plan.real_size());
    plan.inverse(acc.data(), img.data());
    for (auto r = foot.row; r < foot.row_end(); ++r) {
      const auto lr = static_cast<std::size_t>(r - win.row);
      for (auto c = foot.col; c < foot.col_end(); ++c) {
        const auto lc = static_cast<std::size_t>(c - win.col);
        out(static_cast<std::size_t>(r - foot.row), static_cast<std::size_t>(c - foot.col), s) =
            img[lr * n1 + lc] * inv_n;
      }
    }
  }
}

void PsfCamera::backward(const Array3& residual, const Rect& region, Array3& grad, bool parallel) const {
  const std::size_t C = psf_.bands(), S = sensor_.channels(), K = psf_.size();
  const Rect win = window_of(region, K);
  const Rect foot = footprint(region);
  require(residual.rows() == static_cast<std::size_t>(foot.height) &&
              residual.cols() == static_cast<std::size_t>(foot.width) && residual.channels() == S,
          "residual does not match the region footprint");
  const std::size_t h = static_cast<std::size_t>(region.height), w = static_cast<std::size_t>(region.width);
  grad = Array3(h, w, C);
  if (foot.empty()) return;

  const std::size_t n0 = fft::good_size(static_cast<std::size_t>(win.height));
  const std::size_t n1 = fft::good_size(static_cast<std::size_t>(win.width));
  const auto& plan = fft::Plan2d::get(n0, n1);
  const auto& kspec = kernel_spectra(n0, n1);
  const std::size_t half = plan.half_size();

  std::vector<fft::ComplexBuffer> rspec(S);
  for (std::size_t s = 0; s < S; ++s) {
    fft::RealBuffer buf(plan.real_size());
    for (auto r = foot.row; r < foot.row_end(); ++r)
      for (auto c = foot.col; c < foot.col_end(); ++c)
        buf[static_cast<std::size_t>(r - win.row) * n1 + static_cast<std::size_t>(c - win.col)] =
            residual(static_cast<std::size_t>(r - foot.row), static_cast<std::size_t>(c - foot.col), s);
    rspec[s] = fft::ComplexBuffer(half);
    plan.forward(buf.data(), rspec[s].data());
  }

  const double inv_n = 1.0 / static_cast<double>(plan.real_size());
  const auto bands = static_cast<std::ptrdiff_t>(C);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t bi = 0; bi < bands; ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    fft::ComplexBuffer acc(half);
    for (std::size_t s = 0; s < S; ++s) {
      const double o = sensor_.weight(s, b);
      if (o == 0.0) continue;
      for (std::size_t i = 0; i < half; ++i) acc[i] += o * rspec[s][i];
    }
    for (std::size_t i = 0; i < half; ++i) acc[i] *= std::conj(kspec[b][i]);
    fft::RealBuffer img(plan.real_size());
    plan.inverse(acc.data(), img.data());
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) grad(r, c, b) = img[r * n1 + c] * inv_n;
  }
}

void PsfCamera::apply_region(const Array3& values, const Rect& region, Array3& out) const {
  forward(values, region, out, false);
}

void PsfCamera::adjoint_region(const Array3& residual, const Rect& region, Array3& grad) const {
  backward(residual, region, grad, false);
}

Measurement PsfCamera::apply(const HsiCube& x) const {
  require(x.height() == height_ && x.width() == width_, "scene size does not match the camera");
  if (!x.grid().matches(psf_.grid())) throw ConfigError("scene and PSF spectral grids differ");
  Array3 out;
  forward(x.values(), {0, 0, static_cast<std::ptrdiff_t>(height_), static_cast<std::ptrdiff_t>(width_)}, out, true);
  return Measurement(std::move(out));
}

HsiCube PsfCamera::adjoint(const Measurement& y) const {
  require(y.height() == height_ && y.width() == width_ && y.channels() == sensor_.channels(),
          "measurement does not match the camera");
  Array3 grad;
  backward(y.values(), {0, 0, static_cast<std::ptrdiff_t>(height_), static_cast<std::ptrdiff_t>(width_)}, grad, true);
  return HsiCube(psf_.grid(), std::move(grad));
}

Measurement render(const HsiCube& x, const SpectralPsf& psf, const SensorResponse& sensor) {
  if (!x.grid().matches(psf.grid()) || !x.grid().matches(sensor.grid()))
    throw ConfigError("spectral grids of scene, PSF and sensor differ");
  Measurement y = PsfCamera(psf, sensor, x.height(), x.width()).apply(x);
  // Nonnegative scenes give nonnegative images; clear FFT round-off below zero.
  for (double& v : y.values().flat()) v = std::max(v, 0.0);
  return y;
}

}  // namespace specdiff
