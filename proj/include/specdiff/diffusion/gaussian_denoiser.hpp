#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Dense>

#include "specdiff/diffusion/denoiser.hpp"
#include "specdiff/diffusion/schedule.hpp"

namespace specdiff {

/// Exact noise predictor for a Gaussian patch prior x0 ~ N(mu, Sigma).
///
/// The conditioning patch is modeled as y = B x0 + N(0, tau^2 I), so
/// E[x0 | x_t, y] is the usual linear-Gaussian conditional mean given the
/// stacked observation [x_t; y] = [sqrt(alpha_t) I; B] x0 + noise, and
/// eps = (x_t - sqrt(alpha_t) E[x0 | x_t, y]) / sqrt(1 - alpha_t).
///
/// Patches are vectorized in (row, col, band) order. The pixel-separable
/// form uses Sigma = I (x) Sigma_spec and a per-pixel B, which keeps the
/// gains C x C regardless of patch size.
class GaussianPriorDenoiser final : public Denoiser {
 public:
  /// Sigma = factor * factor^T. `cond` maps a vectorized patch to the
  /// vectorized conditioning patch (rows = P * P * cond channels).
  static GaussianPriorDenoiser dense(PatchShape shape, Eigen::VectorXd mean, const Eigen::MatrixXd& factor,
                                     Eigen::MatrixXd cond, double cond_noise, DiffusionSchedule schedule);
  /// Same prior and conditioning matrix for every pixel: spectral mean
  /// (C), spectral factor (C x C'), per-pixel conditioning (S x C).
  static GaussianPriorDenoiser pixel_separable(PatchShape shape, Eigen::VectorXd mean, const Eigen::MatrixXd& factor,
                                               Eigen::MatrixXd cond, double cond_noise, DiffusionSchedule schedule);

  PatchShape shape() const override { return shape_; }
  PatchDomain domain() const override { return PatchDomain::kPhysical; }
  Array3 predict_eps(const Array3& x_t, std::size_t t, const Array3& y_cond) const override;
  bool has_vjp() const override { return true; }
  Array3 vjp(const Array3& x_t, std::size_t t, const Array3& y_cond, const Array3& cotangent) const override;

  /// E[x0 | x_t, y] as a patch.
  Array3 posterior_mean(const Array3& x_t, std::size_t t, const Array3& y_cond) const;
  const DiffusionSchedule& schedule() const { return schedule_; }
  bool separable() const { return separable_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  const Eigen::MatrixXd& conditioning() const { return cond_; }

  GaussianPriorDenoiser(GaussianPriorDenoiser&& other) noexcept;

 private:
  struct Gains {
    Eigen::MatrixXd kx;   // d mean / d x_t
    Eigen::MatrixXd ky;   // d mean / d y
    Eigen::VectorXd bias; // mean at x_t = 0, y = 0
  };
  GaussianPriorDenoiser(PatchShape shape, bool separable, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                        Eigen::MatrixXd cond, double cond_noise, DiffusionSchedule schedule);
  const Gains& gains(std::size_t t) const;

  PatchShape shape_;
  bool separable_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_, cond_;
  double cond_noise_;
  DiffusionSchedule schedule_;
  mutable std::mutex mutex_;
  mutable std::map<std::size_t, std::unique_ptr<Gains>> cache_;
};

}  // namespace specdiff
