#include "specdiff/optics/nanocylinder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "specdiff/core/binary_io.hpp"
#include "specdiff/core/error.hpp"

namespace specdiff {

namespace {

void check_increasing(const std::vector<double>& v, const char* what) {
  require(!v.empty(), std::string(what) + " grid is empty");
  for (std::size_t i = 1; i < v.size(); ++i)
    require(v[i] > v[i - 1], std::string(what) + " grid must be strictly increasing");
}

double wrap_pi(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace

NanocylinderTable::NanocylinderTable(std::vector<double> radii_nm, std::vector<double> wavelengths_nm,
                                     std::vector<double> transmittance, std::vector<double> phase)
    : radii_(std::move(radii_nm)), wavelengths_(std::move(wavelengths_nm)), t_(std::move(transmittance)),
      phi_(std::move(phase)) {
  check_increasing(radii_, "radius");
  check_increasing(wavelengths_, "wavelength");
  const std::size_t n = radii_.size() * wavelengths_.size();
  require(t_.size() == n && phi_.size() == n, "nanocylinder table size mismatch");
  for (double t : t_) require(t >= 0.0 && t <= 1.0, "transmittance must lie in [0, 1]");
  for (double p : phi_) require(std::isfinite(p), "phase must be finite");
}

bool NanocylinderTable::covers(double wavelength_nm) const {
  return wavelength_nm >= wavelengths_.front() && wavelength_nm <= wavelengths_.back();
}

std::vector<std::complex<double>> NanocylinderTable::responses_at(double wavelength_nm) const {
  if (!covers(wavelength_nm)) throw ConfigError("wavelength outside the nanocylinder table");
  const std::size_t L = wavelengths_.size();
  std::size_t hi = static_cast<std::size_t>(
      std::lower_bound(wavelengths_.begin(), wavelengths_.end(), wavelength_nm) - wavelengths_.begin());
  std::size_t lo = hi;
  double frac = 0.0;
  if (wavelengths_[hi] != wavelength_nm) {
    lo = hi - 1;
    frac = (wavelength_nm - wavelengths_[lo]) / (wavelengths_[hi] - wavelengths_[lo]);
  }
  std::vector<std::complex<double>> out(radii_.size());
  for (std::size_t r = 0; r < radii_.size(); ++r) {
    const double t0 = t_[r * L + lo], t1 = t_[r * L + hi];
    const double p0 = phi_[r * L + lo], p1 = phi_[r * L + hi];
    const double t = t0 + frac * (t1 - t0);
    const double p = frac == 0.0 ? p0 : p0 + frac * wrap_pi(p1 - p0);
    out[r] = std::polar(t, p);
  }
  return out;
}

NanocylinderTable proxy_nanocylinder_table(double r_min_nm, double r_max_nm, std::size_t radius_samples,
                                           double lambda_min_nm, double lambda_max_nm,
                                           std::size_t wavelength_samples, double pillar_height_nm) {
  require(radius_samples >= 2 && wavelength_samples >= 2, "proxy table needs at least two samples per axis");
  require(r_max_nm > r_min_nm && lambda_max_nm > lambda_min_nm, "proxy table ranges must be increasing");
  std::vector<double> radii(radius_samples), lambdas(wavelength_samples);
  for (std::size_t i = 0; i < radius_samples; ++i)
    radii[i] = r_min_nm + (r_max_nm - r_min_nm) * static_cast<double>(i) / static_cast<double>(radius_samples - 1);
  for (std::size_t i = 0; i < wavelength_samples; ++i)
    lambdas[i] = lambda_min_nm +
                 (lambda_max_nm - lambda_min_nm) * static_cast<double>(i) / static_cast<double>(wavelength_samples - 1);

  std::vector<double> t(radius_samples * wavelength_samples, 1.0), phi(t.size());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t r = 0; r < radius_samples; ++r) {
    const double u = (radii[r] - r_min_nm) / (r_max_nm - r_min_nm);
    const double n_eff = 1.2 + 1.1 * u * u * (3.0 - 2.0 * u);
    for (std::size_t l = 0; l < wavelength_samples; ++l) {
      double p = std::fmod(two_pi * n_eff * pillar_height_nm / lambdas[l], two_pi);
      phi[r * wavelength_samples + l] = p;
    }
  }
  return NanocylinderTable(std::move(radii), std::move(lambdas), std::move(t), std::move(phi));
}

void write_nanocylinder_table(const std::filesystem::path& path, const NanocylinderTable& table) {
  binio::Writer w(path);
  w.magic("NCT1");
  w.u32(static_cast<std::uint32_t>(table.radius_count()));
  w.u32(static_cast<std::uint32_t>(table.wavelength_count()));
  w.f32s(table.radii_nm());
  w.f32s(table.wavelengths_nm());
  for (std::size_t r = 0; r < table.radius_count(); ++r) {
    for (std::size_t l = 0; l < table.wavelength_count(); ++l) {
      w.f32(static_cast<float>(table.transmittance(r, l)));
      w.f32(static_cast<float>(table.phase(r, l)));
    }
  }
  w.close();
}

NanocylinderTable read_nanocylinder_table(const std::filesystem::path& path) {
  binio::Reader rd(path);
  rd.expect_magic("NCT1");
  const std::uint32_t R = rd.u32();
  const std::uint32_t L = rd.u32();
  require(R > 0 && R <= 1u << 16 && L > 0 && L <= 1u << 16, "implausible nanocylinder table header");
  auto radii = rd.f32s(R);
  auto lambdas = rd.f32s(L);
  auto pairs = rd.f32s(static_cast<std::size_t>(R) * L * 2);
  rd.expect_end();
  std::vector<double> t(static_cast<std::size_t>(R) * L), phi(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = pairs[2 * i];
    phi[i] = pairs[2 * i + 1];
  }
  return NanocylinderTable(std::move(radii), std::move(lambdas), std::move(t), std::move(phi));
}

}  // namespace specdiff
