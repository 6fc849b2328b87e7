#include "specdiff/optics/psf.hpp"

#include <cmath>

#include "specdiff/core/binary_io.hpp"
#include "specdiff/core/error.hpp"

namespace specdiff {

SpectralPsf::SpectralPsf(SpectralGrid grid, Array3 kernels, double pixel_pitch_um)
    : grid_(std::move(grid)), kernels_(std::move(kernels)), pitch_um_(pixel_pitch_um) {
  require(!grid_.empty(), "PSF needs a spectral grid");
  require(kernels_.rows() == kernels_.cols() && kernels_.rows() > 0, "PSF kernels must be square");
  require(kernels_.channels() == grid_.size(), "PSF band count does not match its grid");
  require(pitch_um_ > 0.0, "PSF pixel pitch must be positive");
  for (double v : kernels_.flat()) require(std::isfinite(v) && v >= 0.0, "PSF values must be finite and >= 0");
}

void SpectralPsf::normalize_total() {
  const double total = kernels_.sum();
  if (!(total > 0.0)) throw NumericError("cannot normalize an all-zero PSF");
  kernels_ *= 1.0 / total;
}

SpectralPsf ideal_psf(const SpectralGrid& grid, std::size_t kernel_size, double pixel_pitch_um) {
  require(kernel_size >= 1, "kernel size must be positive");
  Array3 k(kernel_size, kernel_size, grid.size());
  for (std::size_t b = 0; b < grid.size(); ++b) k(kernel_size / 2, kernel_size / 2, b) = 1.0;
  return SpectralPsf(grid, std::move(k), pixel_pitch_um);
}

void write_psf(const std::filesystem::path& path, const SpectralPsf& psf) {
  binio::Writer w(path);
  w.magic("PSF1");
  w.u32(static_cast<std::uint32_t>(psf.size()));
  w.u32(static_cast<std::uint32_t>(psf.bands()));
  w.f32(static_cast<float>(psf.pixel_pitch_um()));
  w.f32s(psf.grid().wavelengths());
  w.f32s(psf.kernels().flat());
  w.close();
}

SpectralPsf read_psf(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic("PSF1");
  const std::uint32_t K = r.u32();
  const std::uint32_t C = r.u32();
  require(K > 0 && K <= 8192 && C > 0 && C <= 4096, "implausible PSF header");
  const double pitch = r.f32();
  SpectralGrid grid(r.f32s(C));
  auto values = r.f32s(static_cast<std::size_t>(K) * K * C);
  Array3 k(K, K, C);
  std::copy(values.begin(), values.end(), k.data());
  r.expect_end();
  return SpectralPsf(std::move(grid), std::move(k), pitch);
}

}  // namespace specdiff
