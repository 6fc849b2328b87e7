#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

namespace specdiff {

/// Sampled nanocylinder response Gamma(r, lambda) = t * exp(i * phi).
///
/// t and phi are stored row-major by radius: index r * L + l.
class NanocylinderTable {
 public:
  NanocylinderTable(std::vector<double> radii_nm, std::vector<double> wavelengths_nm,
                    std::vector<double> transmittance, std::vector<double> phase);

  std::size_t radius_count() const { return radii_.size(); }
  std::size_t wavelength_count() const { return wavelengths_.size(); }
  const std::vector<double>& radii_nm() const { return radii_; }
  const std::vector<double>& wavelengths_nm() const { return wavelengths_; }
  double transmittance(std::size_t r, std::size_t l) const { return t_[r * wavelengths_.size() + l]; }
  double phase(std::size_t r, std::size_t l) const { return phi_[r * wavelengths_.size() + l]; }

  bool covers(double wavelength_nm) const;
  /// Responses of every radius sample at one wavelength, interpolated
  /// linearly in t and along the shorter arc in phase. Throws when the
  /// wavelength lies outside the table.
  std::vector<std::complex<double>> responses_at(double wavelength_nm) const;

 private:
  std::vector<double> radii_, wavelengths_, t_, phi_;
};

/// Analytic stand-in for simulated pillar data: t = 1 and
/// phi = 2*pi * n_eff(r) * height / lambda (mod 2*pi), with n_eff rising
/// smoothly from 1.2 to 2.3 across the radius range.
NanocylinderTable proxy_nanocylinder_table(double r_min_nm = 15.0, double r_max_nm = 110.0,
                                           std::size_t radius_samples = 96, double lambda_min_nm = 380.0,
                                           double lambda_max_nm = 780.0, std::size_t wavelength_samples = 81,
                                           double pillar_height_nm = 600.0);

/// "NCT1", u32 R, L, R f32 radii, L f32 wavelengths, R*L (t, phi) f32 pairs.
void write_nanocylinder_table(const std::filesystem::path& path, const NanocylinderTable& table);
NanocylinderTable read_nanocylinder_table(const std::filesystem::path& path);

}  // namespace specdiff
