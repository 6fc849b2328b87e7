#include "specdiff/diffusion/gaussian_denoiser.hpp"

#include <cmath>

#include "specdiff/core/error.hpp"

namespace specdiff {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(const Array3& a) {
  return {a.data(), static_cast<Eigen::Index>(a.size())};
}

void check_patch(const Array3& a, std::size_t P, std::size_t K, const char* what) {
  if (a.rows() != P || a.cols() != P || a.channels() != K)
    throw ConfigError(std::string(what) + " does not match the denoiser patch shape");
}

}  // namespace

GaussianPriorDenoiser::GaussianPriorDenoiser(PatchShape shape, bool separable, Eigen::VectorXd mean,
                                             Eigen::MatrixXd cov, Eigen::MatrixXd cond, double cond_noise,
                                             DiffusionSchedule schedule)
    : shape_(shape),
      separable_(separable),
      mean_(std::move(mean)),
      cov_(std::move(cov)),
      cond_(std::move(cond)),
      cond_noise_(cond_noise),
      schedule_(std::move(schedule)) {
  require(shape_.size > 0 && shape_.bands > 0, "denoiser patch shape must be non-empty");
  require(std::isfinite(cond_noise_) && cond_noise_ >= 0.0, "conditioning noise must be >= 0");
  const auto n = static_cast<Eigen::Index>(separable_ ? shape_.bands : shape_.values());
  const auto m = static_cast<Eigen::Index>(separable_ ? shape_.cond_channels
                                                      : shape_.size * shape_.size * shape_.cond_channels);
  require(mean_.size() == n, "prior mean has the wrong length");
  require(cov_.rows() == n && cov_.cols() == n, "prior factor has the wrong row count");
  require(cond_.rows() == m && cond_.cols() == n, "conditioning matrix has the wrong shape");
  require(mean_.allFinite() && cov_.allFinite() && cond_.allFinite(), "prior parameters must be finite");
}

GaussianPriorDenoiser::GaussianPriorDenoiser(GaussianPriorDenoiser&& o) noexcept
    : shape_(o.shape_),
      separable_(o.separable_),
      mean_(std::move(o.mean_)),
      cov_(std::move(o.cov_)),
      cond_(std::move(o.cond_)),
      cond_noise_(o.cond_noise_),
      schedule_(std::move(o.schedule_)) {
  std::lock_guard lock(o.mutex_);
  cache_ = std::move(o.cache_);
}

GaussianPriorDenoiser GaussianPriorDenoiser::dense(PatchShape shape, Eigen::VectorXd mean,
                                                   const Eigen::MatrixXd& factor, Eigen::MatrixXd cond,
                                                   double cond_noise, DiffusionSchedule schedule) {
  require(factor.rows() == static_cast<Eigen::Index>(shape.values()), "prior factor has the wrong row count");
  return GaussianPriorDenoiser(shape, false, std::move(mean), factor * factor.transpose(), std::move(cond),
                               cond_noise, std::move(schedule));
}

GaussianPriorDenoiser GaussianPriorDenoiser::pixel_separable(PatchShape shape, Eigen::VectorXd mean,
                                                             const Eigen::MatrixXd& factor, Eigen::MatrixXd cond,
                                                             double cond_noise, DiffusionSchedule schedule) {
  require(factor.rows() == static_cast<Eigen::Index>(shape.bands), "prior factor has the wrong row count");
  return GaussianPriorDenoiser(shape, true, std::move(mean), factor * factor.transpose(), std::move(cond),
                               cond_noise, std::move(schedule));
}

const GaussianPriorDenoiser::Gains& GaussianPriorDenoiser::gains(std::size_t t) const {
  std::lock_guard lock(mutex_);
  auto& slot = cache_[t];
  if (slot) return *slot;

  const double a = schedule_.alpha(t), sa = std::sqrt(a);
  const Eigen::Index n = cov_.rows(), m = cond_.rows();
  // Stacked observation [x_t; y] = G x0 + noise, G = [sqrt(a) I; B].
  Eigen::MatrixXd G(n + m, n);
  G.topRows(n) = sa * Eigen::MatrixXd::Identity(n, n);
  G.bottomRows(m) = cond_;
  const Eigen::MatrixXd GS = G * cov_;
  Eigen::MatrixXd S = GS * G.transpose();
  S.topLeftCorner(n, n).diagonal().array() += 1.0 - a;
  S.bottomRightCorner(m, m).diagonal().array() += cond_noise_ * cond_noise_;

  Eigen::LLT<Eigen::MatrixXd> llt(S);
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  if (llt.info() != Eigen::Success || d.minCoeff() <= 1e-7 * d.maxCoeff())
    throw NumericError("conditional covariance of the Gaussian prior is singular");
  const Eigen::MatrixXd K = llt.solve(GS).transpose();  // n x (n + m)

  auto g = std::make_unique<Gains>();
  g->kx = K.leftCols(n);
  g->ky = K.rightCols(m);
  g->bias = mean_ - K * (G * mean_);
  slot = std::move(g);
  return *slot;
}

Array3 GaussianPriorDenoiser::posterior_mean(const Array3& x_t, std::size_t t, const Array3& y_cond) const {
  check_patch(x_t, shape_.size, shape_.bands, "state patch");
  check_patch(y_cond, shape_.size, shape_.cond_channels, "conditioning patch");
  const Gains& g = gains(t);
  Array3 out(shape_.size, shape_.size, shape_.bands);
  if (!separable_) {
    Eigen::Map<Eigen::VectorXd> o(out.data(), static_cast<Eigen::Index>(out.size()));
    o = g.bias + g.kx * as_vector(x_t) + g.ky * as_vector(y_cond);
    return out;
  }
  const auto C = static_cast<Eigen::Index>(shape_.bands), S = static_cast<Eigen::Index>(shape_.cond_channels);
  for (std::size_t p = 0; p < shape_.size * shape_.size; ++p) {
    Eigen::Map<const Eigen::VectorXd> x(x_t.data() + p * shape_.bands, C);
    Eigen::Map<const Eigen::VectorXd> y(y_cond.data() + p * shape_.cond_channels, S);
    Eigen::Map<Eigen::VectorXd> o(out.data() + p * shape_.bands, C);
    o = g.bias + g.kx * x + g.ky * y;
  }
  return out;
}

Array3 GaussianPriorDenoiser::predict_eps(const Array3& x_t, std::size_t t, const Array3& y_cond) const {
  Array3 m = posterior_mean(x_t, t, y_cond);
  const double a = schedule_.alpha(t), sa = std::sqrt(a), inv = 1.0 / std::sqrt(1.0 - a);
  auto o = m.flat();
  auto x = x_t.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (x[i] - sa * o[i]) * inv;
  return m;
}

Array3 GaussianPriorDenoiser::vjp(const Array3& x_t, std::size_t t, const Array3& y_cond,
                                  const Array3& cotangent) const {
  check_patch(x_t, shape_.size, shape_.bands, "state patch");
  check_patch(y_cond, shape_.size, shape_.cond_channels, "conditioning patch");
  check_patch(cotangent, shape_.size, shape_.bands, "cotangent");
  const Gains& g = gains(t);
  const double a = schedule_.alpha(t), sa = std::sqrt(a), inv = 1.0 / std::sqrt(1.0 - a);
  Array3 out(shape_.size, shape_.size, shape_.bands);
  if (!separable_) {
    Eigen::Map<Eigen::VectorXd> o(out.data(), static_cast<Eigen::Index>(out.size()));
    const auto v = as_vector(cotangent);
    o = (v - sa * (g.kx.transpose() * v)) * inv;
    return out;
  }
  const auto C = static_cast<Eigen::Index>(shape_.bands);
  for (std::size_t p = 0; p < shape_.size * shape_.size; ++p) {
    Eigen::Map<const Eigen::VectorXd> v(cotangent.data() + p * shape_.bands, C);
    Eigen::Map<Eigen::VectorXd> o(out.data() + p * shape_.bands, C);
    o = (v - sa * (g.kx.transpose() * v)) * inv;
  }
  return out;
}

}  // namespace specdiff
