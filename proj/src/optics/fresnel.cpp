#include "specdiff/optics/fresnel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "specdiff/core/error.hpp"
#include "specdiff/core/fft.hpp"

namespace specdiff {

namespace {

using cplx = std::complex<double>;

void check_sampling(const OpticalField& aperture, double wavelength_m, double distance_m) {
  const double width = static_cast<double>(aperture.size) * aperture.pitch_m;
  const double limit = wavelength_m * distance_m / width;
  if (aperture.pitch_m > limit * (1.0 + 1e-12)) {
    throw ConfigError("aperture sampling too coarse for Fresnel propagation: pitch " +
                      std::to_string(aperture.pitch_m) + " m exceeds lambda*d/width = " + std::to_string(limit) +
                      " m");
  }
}

// Propagation sample count giving an output pitch of sensor_pitch / oversample.
std::size_t fft_size_for(double wavelength_m, double distance_m, double sample_pitch_m, double sensor_pitch_m,
                         std::size_t oversample) {
  const double exact = static_cast<double>(oversample) * wavelength_m * distance_m / (sample_pitch_m * sensor_pitch_m);
  auto n = static_cast<std::size_t>(std::llround(exact));
  if (n % 2) ++n;
  return n;
}

}  // namespace

OpticalField fresnel_propagate(const OpticalField& aperture, double wavelength_nm, double distance_m,
                               std::size_t fft_size) {
  require(distance_m > 0.0, "propagation distance must be positive");
  require(aperture.size > 0 && aperture.values.size() == aperture.size * aperture.size, "malformed aperture field");
  require(fft_size % 2 == 0, "Fresnel FFT size must be even");
  require(fft_size >= aperture.size, "Fresnel FFT size smaller than the aperture");
  const double lambda = wavelength_nm * 1e-9;
  check_sampling(aperture, lambda, distance_m);

  const std::size_t A = aperture.size, N = fft_size;
  const double dx = aperture.pitch_m;
  const double du = lambda * distance_m / (static_cast<double>(N) * dx);
  const double chirp = std::numbers::pi / (lambda * distance_m);
  const std::size_t offset = N / 2 - A / 2;
  // Grid coordinate of index j is (j - N/2) dx; true sample coordinates are shifted by `shift`.
  const double shift = (static_cast<double>(A / 2) - 0.5 * static_cast<double>(A - 1)) * dx;

  fft::ComplexBuffer in(N * N), out(N * N);
  for (std::size_t a = 0; a < A; ++a) {
    const double y = (static_cast<double>(a) - 0.5 * static_cast<double>(A - 1)) * dx;
    for (std::size_t b = 0; b < A; ++b) {
      const double x = (static_cast<double>(b) - 0.5 * static_cast<double>(A - 1)) * dx;
      const std::size_t j = a + offset, l = b + offset;
      const double sign = ((j + l) % 2) ? -1.0 : 1.0;
      in[j * N + l] = sign * aperture.values[a * A + b] * std::polar(1.0, chirp * (x * x + y * y));
    }
  }
  fft::Plan2d::get(N, N).forward_complex(in.data(), out.data());

  const double k = 2.0 * std::numbers::pi / lambda;
  const cplx prefactor = std::polar(1.0, k * distance_m) / cplx(0.0, lambda * distance_m) * (dx * dx);
  OpticalField result{N, du, std::vector<cplx>(N * N)};
  for (std::size_t q = 0; q < N; ++q) {
    const double v = (static_cast<double>(q) - 0.5 * static_cast<double>(N)) * du;
    for (std::size_t p = 0; p < N; ++p) {
      const double u = (static_cast<double>(p) - 0.5 * static_cast<double>(N)) * du;
      const double sign = ((q + p) % 2) ? -1.0 : 1.0;
      const double phase = chirp * (u * u + v * v) - 2.0 * std::numbers::pi * shift * (u + v) / (lambda * distance_m);
      result.values[q * N + p] = sign * prefactor * std::polar(1.0, phase) * out[q * N + p];
    }
  }
  return result;
}

double field_power(const OpticalField& field) {
  double s = 0.0;
  for (const cplx& v : field.values) s += std::norm(v);
  return s * field.pitch_m * field.pitch_m;
}

OpticalField aperture_field(const MetalensDesign& design, const NanocylinderTable& table, double wavelength_nm,
                            std::size_t cell_binning) {
  require(cell_binning >= 1, "cell binning must be positive");
  require(design.cells > 0 && design.radius_nm.size() == design.cells * design.cells, "malformed metalens design");
  const auto gamma = table.responses_at(wavelength_nm);
  const auto& radii = table.radii_nm();

  auto response = [&](double r) {
    if (r <= radii.front()) return gamma.front();
    if (r >= radii.back()) return gamma.back();
    const auto hi = static_cast<std::size_t>(std::lower_bound(radii.begin(), radii.end(), r) - radii.begin());
    if (radii[hi] == r) return gamma[hi];
    const double f = (r - radii[hi - 1]) / (radii[hi] - radii[hi - 1]);
    return gamma[hi - 1] + f * (gamma[hi] - gamma[hi - 1]);
  };

  const std::size_t m = cell_binning;
  const std::size_t A = (design.cells + m - 1) / m;
  OpticalField field{A, design.cell_pitch_m * static_cast<double>(m), std::vector<cplx>(A * A)};
  const double norm = 1.0 / static_cast<double>(m * m);
  for (std::size_t r = 0; r < design.cells; ++r) {
    for (std::size_t c = 0; c < design.cells; ++c) {
      field.values[(r / m) * A + c / m] += norm * response(design.radius_nm[r * design.cells + c]);
    }
  }
  return field;
}

SpectralPsf fresnel_psf(const MetalensDesign& design, const NanocylinderTable& table, const SpectralGrid& grid,
                        const FresnelConfig& config) {
  require(config.distance_m > 0.0, "sensor distance must be positive");
  require(config.sensor_pitch_m > 0.0, "sensor pitch must be positive");
  require(config.kernel_size >= 2 && config.kernel_size % 2 == 0, "PSF kernel size must be even");
  require(config.oversample % 2 == 1, "oversample must be odd");
  require(!grid.empty(), "PSF needs a spectral grid");
  for (double w : grid.wavelengths())
    if (!table.covers(w)) throw ConfigError("band " + std::to_string(w) + " nm outside the nanocylinder table");

  const std::size_t K = config.kernel_size;
  const std::size_t C = grid.size();
  const double sample_pitch = design.cell_pitch_m * static_cast<double>(config.cell_binning);
  const std::size_t A = (design.cells + config.cell_binning - 1) / config.cell_binning;

  // Validate every band up front so the parallel loop cannot throw.
  std::vector<std::size_t> oversample(C), sizes(C);
  for (std::size_t b = 0; b < C; ++b) {
    const double lambda = grid[b] * 1e-9;
    OpticalField probe{A, sample_pitch, {}};
    check_sampling(probe, lambda, config.distance_m);
    std::size_t os = config.oversample;
    std::size_t n = fft_size_for(lambda, config.distance_m, sample_pitch, config.sensor_pitch_m, os);
    while (n < A || n < (K + 1) * os) {
      os += 2;
      n = fft_size_for(lambda, config.distance_m, sample_pitch, config.sensor_pitch_m, os);
    }
    oversample[b] = os;
    sizes[b] = n;
  }

  Array3 kernels(K, K, C);
  const std::ptrdiff_t bands = static_cast<std::ptrdiff_t>(C);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t bi = 0; bi < bands; ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    const OpticalField ap = aperture_field(design, table, grid[b], config.cell_binning);
    const OpticalField out = fresnel_propagate(ap, grid[b], config.distance_m, sizes[b]);
    const std::size_t N = sizes[b];
    const auto os = static_cast<std::ptrdiff_t>(oversample[b]);
    const double cell = out.pitch_m * out.pitch_m;
    for (std::size_t sr = 0; sr < K; ++sr) {
      for (std::size_t sc = 0; sc < K; ++sc) {
        const std::ptrdiff_t qr = static_cast<std::ptrdiff_t>(N / 2) + (static_cast<std::ptrdiff_t>(sr) -
                                                                       static_cast<std::ptrdiff_t>(K / 2)) * os;
        const std::ptrdiff_t qc = static_cast<std::ptrdiff_t>(N / 2) + (static_cast<std::ptrdiff_t>(sc) -
                                                                       static_cast<std::ptrdiff_t>(K / 2)) * os;
        double e = 0.0;
        for (std::ptrdiff_t dr = -(os / 2); dr <= os / 2; ++dr)
          for (std::ptrdiff_t dc = -(os / 2); dc <= os / 2; ++dc)
            e += std::norm(out.values[static_cast<std::size_t>(qr + dr) * N + static_cast<std::size_t>(qc + dc)]);
        kernels(sr, sc, b) = e * cell;
      }
    }
  }
  SpectralPsf psf(grid, std::move(kernels), config.sensor_pitch_m * 1e6);
  if (config.normalize) psf.normalize_total();
  return psf;
}

}  // namespace specdiff
