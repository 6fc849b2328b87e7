#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "specdiff/core/error.hpp"
#include "specdiff/metrics/metrics.hpp"
#include "support.hpp"

using namespace specdiff;
using testing_support::random_array;
using testing_support::TempDir;

namespace {

HsiCube cube_of(Array3 a) { return HsiCube(SpectralGrid::uniform(450.0, 650.0, a.channels()), std::move(a)); }

double loop_psnr(const HsiCube& x, const HsiCube& y) {
  double peak = 0.0;
  for (std::size_t r = 0; r < x.height(); ++r)
    for (std::size_t c = 0; c < x.width(); ++c)
      for (std::size_t k = 0; k < x.bands(); ++k) peak = std::max({peak, x(r, c, k), y(r, c, k)});
  double total = 0.0;
  for (std::size_t k = 0; k < x.bands(); ++k) {
    double se = 0.0;
    for (std::size_t r = 0; r < x.height(); ++r)
      for (std::size_t c = 0; c < x.width(); ++c) se += std::pow(x(r, c, k) - y(r, c, k), 2);
    total += 10.0 * std::log10(peak / (se / static_cast<double>(x.height() * x.width())));
  }
  return total / static_cast<double>(x.bands());
}

// Angle from atan2(|a x b|, a.b), with |a x b|^2 summed by the Lagrange identity.
double loop_sam(const HsiCube& x, const HsiCube& y) {
  double total = 0.0;
  for (std::size_t r = 0; r < x.height(); ++r)
    for (std::size_t c = 0; c < x.width(); ++c) {
      double dot = 0.0, cross = 0.0;
      for (std::size_t i = 0; i < x.bands(); ++i) {
        dot += x(r, c, i) * y(r, c, i);
        for (std::size_t j = i + 1; j < x.bands(); ++j) cross += std::pow(x(r, c, i) * y(r, c, j) - x(r, c, j) * y(r, c, i), 2);
      }
      total += std::atan2(std::sqrt(cross), dot);
    }
  return total / static_cast<double>(x.height() * x.width());
}

// Windowed SSIM with an explicit 2D weight table instead of separable passes.
double loop_ssim(const HsiCube& x, const HsiCube& y) {
  double w[11][11], s = 0.0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) s += (w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / 4.5));
  double L = std::max(x.values().max(), y.values().max());
  const double c1 = std::pow(0.01 * L, 2), c2 = std::pow(0.03 * L, 2);
  double total = 0.0;
  for (std::size_t k = 0; k < x.bands(); ++k) {
    double band = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r + 11 <= x.height(); ++r)
      for (std::size_t c = 0; c + 11 <= x.width(); ++c) {
        double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            const double wt = w[i][j] / s, a = x(r + i, c + j, k), b = y(r + i, c + j, k);
            ma += wt * a;
            mb += wt * b;
            maa += wt * a * a;
            mbb += wt * b * b;
            mab += wt * a * b;
          }
        const double va = maa - ma * ma, vb = mbb - mb * mb, cv = mab - ma * mb;
        band += (2 * ma * mb + c1) * (2 * cv + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++n;
      }
    total += band / static_cast<double>(n);
  }
  return total / static_cast<double>(x.bands());
}

// Integer pattern shared with the script that produced the frozen SSIM values.
std::pair<HsiCube, HsiCube> lattice_pair(bool affine) {
  Array3 a(20, 17, 3), b(20, 17, 3);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 17; ++c)
      for (std::size_t k = 0; k < 3; ++k) {
        a(r, c, k) = static_cast<double>((r * 31 + c * 17 + k * 7) % 23) / 22.0;
        b(r, c, k) = affine ? 0.5 * a(r, c, k) + 0.1
                            : a(r, c, k) + (static_cast<double>((r * 13 + c * 5 + k * 3) % 11) - 5.0) / 100.0;
      }
  return {cube_of(a), cube_of(b)};
}

}  // namespace

TEST_CASE("psnr: constant error of 0.1 under unit peak gives 20 dB") {
  std::mt19937_64 rng(1);
  Array3 a = random_array(6, 5, 3, rng, 0.0, 0.9);
  a(0, 0, 0) = 0.9;
  Array3 b = a;
  for (double& v : b.flat()) v += 0.1;
  CHECK(psnr(cube_of(a), cube_of(b)) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("psnr: scaling both cubes by a shifts PSNR by -10 log10 a") {
  std::mt19937_64 rng(2);
  Array3 a = random_array(8, 8, 4, rng), b = random_array(8, 8, 4, rng);
  Array3 a2 = a, b2 = b;
  for (double& v : a2.flat()) v *= 2.0;
  for (double& v : b2.flat()) v *= 2.0;
  const double d = psnr(cube_of(a2), cube_of(b2)) - psnr(cube_of(a), cube_of(b));
  CHECK(d == doctest::Approx(-10.0 * std::log10(2.0)).epsilon(1e-10));
}

TEST_CASE("psnr and sam match loop oracles") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t h = 1 + rng() % 16, w = 1 + rng() % 16, c = 1 + rng() % 8;
    const HsiCube x = cube_of(random_array(h, w, c, rng, 0.05, 1.0));
    const HsiCube y = cube_of(random_array(h, w, c, rng, 0.05, 1.0));
    CHECK(std::abs(psnr(x, y) - loop_psnr(x, y)) < 1e-10);
    CHECK(std::abs(sam(x, y).mean - loop_sam(x, y)) < 1e-10);
  }
}

TEST_CASE("psnr: identical cubes give infinity") {
  std::mt19937_64 rng(4);
  const HsiCube x = cube_of(random_array(4, 4, 2, rng));
  CHECK(std::isinf(psnr(x, x)));
}

TEST_CASE("sam: scale invariance and orthogonal spectra") {
  std::mt19937_64 rng(5);
  Array3 a = random_array(7, 6, 5, rng, 0.1, 1.0), b = a;
  for (double& v : b.flat()) v *= 3.0;
  CHECK(sam(cube_of(a), cube_of(b)).mean < 1e-15);
  Array3 b4 = a;
  for (double& v : b4.flat()) v *= 4.0;
  CHECK(sam(cube_of(a), cube_of(b4)).mean == 0.0);

  Array3 s = a;
  for (std::size_t r = 0; r < 7; ++r)
    for (std::size_t c = 0; c < 6; ++c) {
      const double f = 0.2 + static_cast<double>(r * 6 + c);
      for (std::size_t k = 0; k < 5; ++k) s(r, c, k) *= f;
    }
  const HsiCube other = cube_of(random_array(7, 6, 5, rng, 0.1, 1.0));
  CHECK(sam(cube_of(s), other).mean == doctest::Approx(sam(cube_of(a), other).mean).epsilon(1e-12));

  Array3 e1(1, 1, 2), e2(1, 1, 2);
  e1(0, 0, 0) = 1.0;
  e2(0, 0, 1) = 2.0;
  CHECK(sam(cube_of(e1), cube_of(e2)).mean == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("sam: zero spectra are excluded and counted") {
  std::mt19937_64 rng(6);
  Array3 a = random_array(4, 4, 3, rng, 0.1, 1.0), b = random_array(4, 4, 3, rng, 0.1, 1.0);
  for (std::size_t k = 0; k < 3; ++k) a(1, 2, k) = 0.0;
  for (std::size_t k = 0; k < 3; ++k) b(3, 0, k) = 0.0;
  const SamResult r = sam(cube_of(a), cube_of(b));
  CHECK(r.excluded == 2);
  CHECK(r.pixels == 16);
  CHECK(std::isfinite(r.mean));
  CHECK(r.excluded_fraction() == doctest::Approx(2.0 / 16.0));
}

TEST_CASE("ssim: frozen reference values") {
  // skimage structural_similarity, gaussian_weights, sigma 1.5, population
  // covariance, data_range = max of both cubes, mean over bands.
  auto [x, y] = lattice_pair(false);
  CHECK(std::abs(ssim_mean(x, y) - 0.9945463487148413) < 1e-6);
  auto [u, v] = lattice_pair(true);
  CHECK(std::abs(ssim_mean(u, v) - 0.7529912589794052) < 1e-6);
}

TEST_CASE("ssim: separable evaluation matches a direct window loop") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const HsiCube x = cube_of(random_array(11 + rng() % 10, 11 + rng() % 10, 1 + rng() % 4, rng));
    Array3 noisy = x.values();
    std::normal_distribution<double> n(0.0, 0.1);
    for (double& v : noisy.flat()) v += n(rng);
    const HsiCube y = cube_of(noisy);
    CHECK(std::abs(ssim_mean(x, y) - loop_ssim(x, y)) < 1e-10);
  }
}

TEST_CASE("ssim: bounds, identity and small images") {
  std::mt19937_64 rng(8);
  const HsiCube x = cube_of(random_array(12, 12, 2, rng));
  CHECK(ssim_mean(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  Array3 neg = x.values();
  for (double& v : neg.flat()) v = 1.0 - v;
  const double s = ssim_mean(x, cube_of(neg));
  CHECK(s >= -1.0);
  CHECK(s <= 1.0);
  const HsiCube tiny = cube_of(random_array(10, 12, 2, rng));
  CHECK_THROWS_AS(ssim_mean(tiny, tiny), ConfigError);
}

TEST_CASE("masked metrics: keep 1 equals unmasked and true-error ranking helps") {
  std::mt19937_64 rng(9);
  const HsiCube x = cube_of(random_array(12, 10, 4, rng, 0.1, 1.0));
  const HsiCube y = cube_of(random_array(12, 10, 4, rng, 0.1, 1.0));
  const Array3 err = squared_error_map(x, y);
  const MetricReport full = masked_metrics(x, y, err, 1.0);
  CHECK(full.psnr == doctest::Approx(psnr(x, y)).epsilon(1e-14));
  CHECK(full.sam == doctest::Approx(sam(x, y).mean).epsilon(1e-14));
  CHECK(full.kept_fraction == 1.0);
  CHECK_FALSE(full.ssim.has_value());
  double prev = full.psnr;
  for (double keep : {0.95, 0.8, 0.5, 0.2}) {
    const MetricReport m = masked_metrics(x, y, err, keep);
    CHECK(m.psnr >= prev);
    CHECK(m.kept_fraction == doctest::Approx(keep).epsilon(0.01));
    prev = m.psnr;
  }
}

TEST_CASE("masked metrics: ties keep row-major order") {
  Array3 a(2, 3, 1), b(2, 3, 1), unc(2, 3, 1, 0.5);
  for (std::size_t i = 0; i < 6; ++i) {
    a.data()[i] = 1.0;
    b.data()[i] = 1.0 + 0.1 * static_cast<double>(i);
  }
  // keep 3 of 6: pixels 0, 1, 2 with squared errors 0, 0.01, 0.04.
  const MetricReport m = masked_metrics(cube_of(a), cube_of(b), unc, 0.5);
  const double peak = 1.5;
  CHECK(m.psnr == doctest::Approx(10.0 * std::log10(peak / (0.05 / 3.0))).epsilon(1e-12));
  CHECK_THROWS_AS(masked_metrics(cube_of(a), cube_of(b), unc, 0.0), ConfigError);
  CHECK_THROWS_AS(masked_metrics(cube_of(a), cube_of(b), Array3(3, 2, 1), 0.5), ConfigError);
}

TEST_CASE("pearson: known values, errors, seeded subsampling") {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1}, k{5, 5, 5, 5};
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  CHECK(pearson(a, c) == doctest::Approx(-1.0));
  const std::vector<double> p{1, 2, 3, 4, 5}, q{2, 1, 4, 3, 5};
  CHECK(pearson(p, q) == doctest::Approx(0.8));
  CHECK_THROWS_AS(pearson(a, k), NumericError);

  std::mt19937_64 rng(10);
  const HsiCube x = cube_of(random_array(120, 100, 2, rng));
  const HsiCube y = cube_of(random_array(120, 100, 2, rng));
  Array3 unc = squared_error_map(x, y);
  for (double& v : unc.flat()) v = v + 0.05 * std::uniform_real_distribution<double>(0, 1)(rng);
  const double r1 = uncertainty_error_correlation(unc, x, y, 10000, 3);
  CHECK(r1 == uncertainty_error_correlation(unc, x, y, 10000, 3));
  CHECK(r1 != uncertainty_error_correlation(unc, x, y, 10000, 4));
  CHECK(r1 > 0.9);
  CHECK(uncertainty_error_correlation(unc, x, y, 1000000, 3) > 0.9);
}

TEST_CASE("metrics csv") {
  TempDir dir("metrics");
  MetricReport r;
  r.psnr = 30.5;
  r.sam = 0.1;
  r.ssim = 0.9;
  write_metrics_csv(dir / "m.csv", r, "abc123");
  std::ifstream in(dir / "m.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "metric,value,config_hash");
  std::getline(in, line);
  CHECK(line == "psnr,30.5,abc123");
}
