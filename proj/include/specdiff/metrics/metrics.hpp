#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specdiff/core/array3.hpp"
#include "specdiff/core/cube.hpp"

namespace specdiff {

/// Mean over bands of 10 log10(m / MSE_band), m the largest value in
/// either cube. +inf when the cubes are identical.
double psnr(const HsiCube& x, const HsiCube& x_hat);

struct SamResult {
  double mean = 0.0;           // radians, over included pixels
  std::size_t excluded = 0;    // pixels with a zero spectrum in either cube
  std::size_t pixels = 0;
  double excluded_fraction() const { return pixels ? static_cast<double>(excluded) / static_cast<double>(pixels) : 0.0; }
};
/// Mean spectral angle. Pixels with an all-zero spectrum are skipped and counted.
SamResult sam(const HsiCube& x, const HsiCube& x_hat);

/// Single-channel SSIM per band (11 x 11 Gaussian window, sigma 1.5,
/// k1 = 0.01, k2 = 0.03, dynamic range = max over both cubes), averaged
/// over windows fully inside the image and then over bands.
double ssim_mean(const HsiCube& x, const HsiCube& x_hat);

struct MetricReport {
  double psnr = 0.0;
  double sam = 0.0;
  std::size_t sam_excluded = 0;
  std::optional<double> ssim;
  double kept_fraction = 1.0;
  std::optional<double> pearson;
};

MetricReport full_metrics(const HsiCube& x, const HsiCube& x_hat);

/// PSNR and SAM over the `keep` fraction of pixels with the lowest
/// uncertainty (H x W x 1). Ties keep row-major order. The PSNR peak is
/// still taken over the full cubes.
MetricReport masked_metrics(const HsiCube& x, const HsiCube& x_hat, const Array3& uncertainty, double keep);

/// Per-pixel squared error summed over bands, H x W x 1.
Array3 squared_error_map(const HsiCube& x, const HsiCube& x_hat);

/// Sample Pearson correlation. Throws when either input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Pearson r between uncertainty and squared error over at most
/// `max_points` pixels drawn without replacement with `seed`.
double uncertainty_error_correlation(const Array3& uncertainty, const HsiCube& x, const HsiCube& x_hat,
                                     std::size_t max_points = 10000, std::uint64_t seed = 0);

/// "metric,value,config_hash" rows.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<std::pair<std::string, double>>& rows,
                       const std::string& config_hash);
void write_metrics_csv(const std::filesystem::path& path, const MetricReport& report, const std::string& config_hash);

}  // namespace specdiff
