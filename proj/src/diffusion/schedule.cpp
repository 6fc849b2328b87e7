#include "specdiff/diffusion/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "specdiff/core/error.hpp"
#include "specdiff/core/rng.hpp"

namespace specdiff {

DiffusionSchedule::DiffusionSchedule(std::size_t T, double beta_start, double beta_end, std::size_t ddim_steps,
                                     double ddim_eta)
    : T_(T), eta_(ddim_eta) {
  require(T >= 1, "schedule needs at least one timestep");
  require(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0, "need 0 < beta_start <= beta_end < 1");
  require(ddim_steps >= 1 && ddim_steps <= T, "DDIM steps must lie in [1, T]");
  require(std::isfinite(ddim_eta) && ddim_eta >= 0.0, "DDIM eta must be >= 0");
  beta_.assign(T + 1, 0.0);
  alpha_.assign(T + 1, 1.0);
  for (std::size_t t = 1; t <= T; ++t) {
    const double f = T == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(T - 1);
    beta_[t] = beta_start + f * (beta_end - beta_start);
    alpha_[t] = alpha_[t - 1] * (1.0 - beta_[t]);
  }
  for (std::size_t i = 1; i <= ddim_steps; ++i) steps_.push_back(i * T / ddim_steps);
}

double DiffusionSchedule::beta(std::size_t t) const {
  require(t >= 1 && t <= T_, "timestep out of range");
  return beta_[t];
}

double DiffusionSchedule::alpha(std::size_t t) const {
  require(t <= T_, "timestep out of range");
  return alpha_[t];
}

double DiffusionSchedule::snr(std::size_t t) const {
  require(t >= 1 && t <= T_, "timestep out of range");
  return alpha_[t] / (1.0 - alpha_[t]);
}

double DiffusionSchedule::sigma(std::size_t t, std::size_t t_prev) const {
  require(t_prev <= t && t <= T_, "DDIM step must go backward in time");
  if (eta_ == 0.0 || t_prev == t) return 0.0;
  const double a = alpha(t), ap = alpha(t_prev);
  return eta_ * std::sqrt((1.0 - ap) / (1.0 - a)) * std::sqrt(1.0 - a / ap);
}

DiffusionSchedule make_schedule(std::size_t T, double beta_start, double beta_end, std::size_t ddim_steps,
                                double ddim_eta) {
  return DiffusionSchedule(T, beta_start, beta_end, ddim_steps, ddim_eta);
}

Array3 q_sample(const Array3& x0, std::size_t t, const Array3& eps, const DiffusionSchedule& s) {
  require(x0.same_shape(eps), "noise must match the signal shape");
  const double a = s.alpha(t), sa = std::sqrt(a), sn = std::sqrt(1.0 - a);
  Array3 out = x0;
  auto o = out.flat();
  auto e = eps.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = sa * o[i] + sn * e[i];
  return out;
}

Array3 x0_hat(const Array3& x_t, const Array3& eps, std::size_t t, const DiffusionSchedule& s) {
  require(x_t.same_shape(eps), "noise estimate must match the state shape");
  const double a = s.alpha(t);
  if (!(a > 0.0)) throw NumericError("alpha_t is zero; x0 cannot be recovered");
  const double inv = 1.0 / std::sqrt(a), sn = std::sqrt(1.0 - a);
  Array3 out = x_t;
  auto o = out.flat();
  auto e = eps.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (o[i] - sn * e[i]) * inv;
  return out;
}

Array3 ddim_step(const Array3& x_t, const Array3& eps, std::size_t t, std::size_t t_prev, const DiffusionSchedule& s,
                 std::mt19937_64& rng) {
  const double sigma = s.sigma(t, t_prev);
  const double ap = s.alpha(t_prev);
  const double dir2 = 1.0 - ap - sigma * sigma;
  if (dir2 < -1e-12) throw NumericError("DDIM sigma exceeds the noise budget of the target step");
  const double dir = std::sqrt(std::max(dir2, 0.0));
  Array3 out = x0_hat(x_t, eps, t, s);
  auto o = out.flat();
  auto e = eps.flat();
  const double sa = std::sqrt(ap);
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = sa * o[i] + dir * e[i];
  if (sigma > 0.0) {
    std::vector<double> w(o.size());
    fill_normal(w, rng, sigma);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += w[i];
  }
  return out;
}

double min_snr_weight(const DiffusionSchedule& s, std::size_t t, double k) {
  require(k > 0.0, "min-SNR k must be positive");
  const double snr = s.snr(t);
  return std::min(snr, k) / snr;
}

}  // namespace specdiff
