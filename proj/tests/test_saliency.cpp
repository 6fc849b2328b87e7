#include <doctest.h>

#include <random>

#include "specdiff/core/error.hpp"
#include "specdiff/diffusion/gaussian_denoiser.hpp"
#include "specdiff/saliency/saliency.hpp"
#include "support.hpp"

using namespace specdiff;
using testing_support::random_array;

namespace {

constexpr std::size_t P = 6, C = 2;

// Independent pixels; measurement pixel q sees the spectrum at q + shift
// (cyclic), weighted by o. Output pixel r therefore depends on y only at r - shift.
GaussianPriorDenoiser shifted_prior(std::ptrdiff_t dr, std::ptrdiff_t dc, const DiffusionSchedule& s) {
  const std::size_t n = P * P * C;
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
  Eigen::Matrix2d block;
  block << 0.3, 0.0, 0.1, 0.25;
  for (std::size_t q = 0; q < P * P; ++q) F.block(q * C, q * C, C, C) = block;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(P * P, n);
  const auto wrap = [](std::ptrdiff_t v) { return static_cast<std::size_t>((v % std::ptrdiff_t(P) + P) % P); };
  for (std::size_t r = 0; r < P; ++r)
    for (std::size_t c = 0; c < P; ++c) {
      const std::size_t src = wrap(std::ptrdiff_t(r) + dr) * P + wrap(std::ptrdiff_t(c) + dc);
      B(r * P + c, src * C) = 0.7;
      B(r * P + c, src * C + 1) = 0.4;
    }
  return GaussianPriorDenoiser::dense({P, C, 1}, Eigen::VectorXd::Constant(n, 0.5), F, B, 0.05, s);
}

struct IgnoresY final : Denoiser {
  PatchShape shape() const override { return {P, C, 1}; }
  PatchDomain domain() const override { return PatchDomain::kNormalized; }
  Array3 predict_eps(const Array3& x, std::size_t t, const Array3&) const override {
    Array3 e = x;
    for (double& v : e.flat()) v = 0.3 * v + 1e-4 * static_cast<double>(t);
    return e;
  }
};

std::size_t wrap(std::ptrdiff_t v) { return static_cast<std::size_t>((v % std::ptrdiff_t(P) + P) % P); }

}  // namespace

TEST_CASE("saliency is nonzero exactly on the coupled measurement pixel") {
  std::mt19937_64 rng(1);
  const auto s = make_schedule(1000, 1e-4, 0.02, 15, 0.0);
  const auto den = shifted_prior(1, 2, s);
  const Array3 y = random_array(P, P, 1, rng, 0.2, 1.0);
  for (auto [rr, rc] : {std::pair<std::size_t, std::size_t>{0, 0}, {3, 4}, {5, 1}}) {
    const Array3 m = saliency_map(den, s, y, rr, rc, 7);
    const std::size_t sr = wrap(std::ptrdiff_t(rr) - 1), sc = wrap(std::ptrdiff_t(rc) - 2);
    for (std::size_t i = 0; i < P; ++i)
      for (std::size_t j = 0; j < P; ++j) {
        CHECK(m(i, j, 0) >= 0.0);
        if (i == sr && j == sc)
          CHECK(m(i, j, 0) > 1e-3);
        else
          CHECK(m(i, j, 0) < 1e-12);
      }
  }
}

TEST_CASE("saliency support follows a shift of the coupling") {
  std::mt19937_64 rng(2);
  const auto s = make_schedule(1000, 1e-4, 0.02, 10, 0.0);
  const Array3 y = random_array(P, P, 1, rng, 0.2, 1.0);
  const auto argmax = [](const Array3& m) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < m.size(); ++k)
      if (m.data()[k] > m.data()[best]) best = k;
    return best;
  };
  const std::size_t a = argmax(saliency_map(shifted_prior(0, 0, s), s, y, 2, 2, 3));
  const std::size_t b = argmax(saliency_map(shifted_prior(1, 0, s), s, y, 2, 2, 3));
  const std::size_t c = argmax(saliency_map(shifted_prior(0, -2, s), s, y, 2, 2, 3));
  CHECK(a == 2 * P + 2);
  CHECK(b == 1 * P + 2);
  CHECK(c == 2 * P + 4);
}

TEST_CASE("saliency: determinism, seed independence for a linear model, zero pixels") {
  std::mt19937_64 rng(3);
  const auto s = make_schedule(1000, 1e-4, 0.02, 10, 0.0);
  const auto den = shifted_prior(0, 1, s);
  Array3 y = random_array(P, P, 1, rng, 0.2, 1.0);
  y(2, 3, 0) = 0.0;
  const Array3 m1 = saliency_map(den, s, y, 2, 2, 11);
  CHECK(m1 == saliency_map(den, s, y, 2, 2, 11));
  const Array3 m2 = saliency_map(den, s, y, 2, 2, 12);
  CHECK(testing_support::max_abs_diff(m1, m2) < 1e-9 * testing_support::max_abs(m1));
  CHECK(m1(2, 3, 0) == 0.0);  // the coupled pixel is already zero
}

TEST_CASE("saliency of a denoiser that ignores y is zero") {
  std::mt19937_64 rng(4);
  const auto s = make_schedule(1000, 1e-4, 0.02, 8, 0.0);
  IgnoresY den;
  const auto patches = random_patches(random_array(20, 20, 1, rng, 0.1, 1.0), P, 3, 5);
  CHECK(patches.size() == 3);
  const Array3 m = saliency_map(den, s, patches, 1, 4, 9);
  CHECK(testing_support::max_abs(m) == 0.0);
}

TEST_CASE("saliency averages over patches and rejects stochastic sampling") {
  std::mt19937_64 rng(5);
  const auto s = make_schedule(1000, 1e-4, 0.02, 8, 0.0);
  const auto den = shifted_prior(0, 0, s);
  const auto patches = random_patches(random_array(15, 17, 1, rng, 0.1, 1.0), P, 4, 2);
  Array3 want(P, P, 1);
  for (const auto& p : patches) {
    const Array3 m = saliency_map(den, s, p, 1, 1, 0);
    for (std::size_t k = 0; k < want.size(); ++k) want.data()[k] += m.data()[k] / 4.0;
  }
  CHECK(testing_support::max_abs_diff(saliency_map(den, s, patches, 1, 1, 0), want) < 1e-15);
  CHECK(random_patches(random_array(15, 17, 1, rng), P, 4, 2).size() == 4);

  const auto noisy = make_schedule(1000, 1e-4, 0.02, 8, 0.5);
  CHECK_THROWS_AS(saliency_map(den, noisy, patches[0], 1, 1, 0), ConfigError);
  CHECK_THROWS_AS(saliency_map(den, s, patches[0], P, 0, 0), ConfigError);
  CHECK_THROWS_AS(saliency_map(den, s, Array3(P, P, 2), 0, 0, 0), ConfigError);
}

TEST_CASE("saliency map as a single-band PSF file") {
  Array3 m(4, 4, 1, 0.25);
  const SpectralPsf p = saliency_as_psf(m, 550.0);
  CHECK(p.bands() == 1);
  testing_support::TempDir dir("sal");
  write_psf(dir / "s.psf", p);
  CHECK(read_psf(dir / "s.psf") == p);
}
