#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "specdiff/core/array3.hpp"

namespace specdiff {

/// Linear-beta DDPM schedule plus the DDIM sub-sequence used for sampling.
/// Indices run 1..T; alpha(0) = 1 stands for the clean signal.
class DiffusionSchedule {
 public:
  DiffusionSchedule(std::size_t T, double beta_start, double beta_end, std::size_t ddim_steps, double ddim_eta);

  std::size_t T() const { return T_; }
  double beta(std::size_t t) const;
  /// Cumulative product of (1 - beta_s) for s <= t.
  double alpha(std::size_t t) const;
  double snr(std::size_t t) const;
  double ddim_eta() const { return eta_; }
  /// Ascending DDIM timesteps, floor(i T / S) for i = 1..S.
  const std::vector<std::size_t>& steps() const { return steps_; }
  /// Stochastic DDIM spread for a step t -> t_prev.
  double sigma(std::size_t t, std::size_t t_prev) const;

 private:
  std::size_t T_;
  double eta_;
  std::vector<double> beta_, alpha_;
  std::vector<std::size_t> steps_;
};

DiffusionSchedule make_schedule(std::size_t T = 1000, double beta_start = 1e-4, double beta_end = 0.02,
                                std::size_t ddim_steps = 50, double ddim_eta = 0.0);

/// x_t = sqrt(alpha_t) x0 + sqrt(1 - alpha_t) eps
Array3 q_sample(const Array3& x0, std::size_t t, const Array3& eps, const DiffusionSchedule& s);

/// (x_t - sqrt(1 - alpha_t) eps) / sqrt(alpha_t)
Array3 x0_hat(const Array3& x_t, const Array3& eps, std::size_t t, const DiffusionSchedule& s);

/// One DDIM update t -> t_prev (t_prev = 0 yields the clean estimate).
/// Fresh noise is drawn from `rng` only when sigma > 0.
Array3 ddim_step(const Array3& x_t, const Array3& eps, std::size_t t, std::size_t t_prev,
                 const DiffusionSchedule& s, std::mt19937_64& rng);

/// min(SNR_t, k) / SNR_t
double min_snr_weight(const DiffusionSchedule& s, std::size_t t, double k);

}  // namespace specdiff
