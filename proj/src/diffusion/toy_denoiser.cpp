#include "specdiff/diffusion/toy_denoiser.hpp"

#include <cmath>

#include "specdiff/core/binary_io.hpp"
#include "specdiff/core/error.hpp"
#include "specdiff/core/rng.hpp"

namespace specdiff {

ToyDenoiser::ToyDenoiser(PatchShape shape, std::size_t hidden, std::size_t time_features)
    : shape_(shape), hidden_(hidden), time_features_(time_features) {
  require(shape.size > 0 && shape.bands > 0, "denoiser patch shape must be non-empty");
  require(hidden > 0, "hidden width must be positive");
  require(time_features % 2 == 0, "time features come in sin/cos pairs");
  params_.assign(b2() + output_size(), 0.0);
}

void ToyDenoiser::initialize(std::mt19937_64& rng) {
  const std::size_t in = input_size(), out = output_size();
  std::uniform_real_distribution<double> u1(-1.0, 1.0);
  const double s1 = std::sqrt(6.0 / static_cast<double>(in + hidden_));
  const double s2 = std::sqrt(6.0 / static_cast<double>(hidden_ + out));
  for (std::size_t i = 0; i < hidden_ * in; ++i) params_[w1() + i] = s1 * u1(rng);
  for (std::size_t i = 0; i < out * hidden_; ++i) params_[w2() + i] = s2 * u1(rng);
  std::fill(params_.begin() + static_cast<std::ptrdiff_t>(b1()), params_.begin() + static_cast<std::ptrdiff_t>(w2()), 0.0);
  std::fill(params_.begin() + static_cast<std::ptrdiff_t>(b2()), params_.end(), 0.0);
}

std::vector<double> ToyDenoiser::input(const Array3& x_t, std::size_t t, const Array3& y_cond) const {
  const std::size_t P = shape_.size;
  if (x_t.rows() != P || x_t.cols() != P || x_t.channels() != shape_.bands)
    throw ConfigError("state patch does not match the denoiser patch shape");
  if (y_cond.rows() != P || y_cond.cols() != P || y_cond.channels() != shape_.cond_channels)
    throw ConfigError("conditioning patch does not match the denoiser patch shape");
  std::vector<double> in;
  in.reserve(input_size());
  in.insert(in.end(), x_t.flat().begin(), x_t.flat().end());
  in.insert(in.end(), y_cond.flat().begin(), y_cond.flat().end());
  const std::size_t half = time_features_ / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const double w = std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half));
    in.push_back(std::sin(static_cast<double>(t) * w));
    in.push_back(std::cos(static_cast<double>(t) * w));
  }
  return in;
}

std::vector<double> ToyDenoiser::forward(const std::vector<double>& in, std::vector<double>* hidden_out) const {
  const std::size_t I = input_size(), O = output_size();
  std::vector<double> h(hidden_);
  for (std::size_t j = 0; j < hidden_; ++j) {
    double s = params_[b1() + j];
    const double* row = &params_[w1() + j * I];
    for (std::size_t i = 0; i < I; ++i) s += row[i] * in[i];
    h[j] = std::tanh(s);
  }
  std::vector<double> out(O);
  for (std::size_t o = 0; o < O; ++o) {
    double s = params_[b2() + o];
    const double* row = &params_[w2() + o * hidden_];
    for (std::size_t j = 0; j < hidden_; ++j) s += row[j] * h[j];
    out[o] = s;
  }
  if (hidden_out) *hidden_out = std::move(h);
  return out;
}

void ToyDenoiser::accumulate_parameter_grad(const std::vector<double>& in, const std::vector<double>& cot,
                                            std::vector<double>& grad) const {
  const std::size_t I = input_size(), O = output_size();
  std::vector<double> h;
  forward(in, &h);
  std::vector<double> dh(hidden_, 0.0);
  for (std::size_t o = 0; o < O; ++o) {
    grad[b2() + o] += cot[o];
    for (std::size_t j = 0; j < hidden_; ++j) {
      grad[w2() + o * hidden_ + j] += cot[o] * h[j];
      dh[j] += cot[o] * params_[w2() + o * hidden_ + j];
    }
  }
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double dz = dh[j] * (1.0 - h[j] * h[j]);
    grad[b1() + j] += dz;
    for (std::size_t i = 0; i < I; ++i) grad[w1() + j * I + i] += dz * in[i];
  }
}

Array3 ToyDenoiser::predict_eps(const Array3& x_t, std::size_t t, const Array3& y_cond) const {
  const auto out = forward(input(x_t, t, y_cond));
  Array3 eps(shape_.size, shape_.size, shape_.bands);
  std::copy(out.begin(), out.end(), eps.data());
  return eps;
}

Array3 ToyDenoiser::vjp(const Array3& x_t, std::size_t t, const Array3& y_cond, const Array3& cotangent) const {
  if (!cotangent.same_shape(x_t)) throw ConfigError("cotangent does not match the state patch");
  const auto in = input(x_t, t, y_cond);
  const std::size_t I = input_size(), O = output_size();
  std::vector<double> h;
  forward(in, &h);
  const double* v = cotangent.data();
  std::vector<double> dz(hidden_, 0.0);
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t j = 0; j < hidden_; ++j) dz[j] += v[o] * params_[w2() + o * hidden_ + j];
  for (std::size_t j = 0; j < hidden_; ++j) dz[j] *= 1.0 - h[j] * h[j];
  Array3 grad(shape_.size, shape_.size, shape_.bands);
  double* g = grad.data();
  // x_t occupies the first output_size() inputs.
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double* row = &params_[w1() + j * I];
    for (std::size_t i = 0; i < O; ++i) g[i] += dz[j] * row[i];
  }
  return grad;
}

void write_toy_denoiser(const std::filesystem::path& path, const ToyDenoiser& net) {
  binio::Writer w(path);
  w.magic("TDN1");
  w.u32(static_cast<std::uint32_t>(net.shape().size));
  w.u32(static_cast<std::uint32_t>(net.shape().bands));
  w.u32(static_cast<std::uint32_t>(net.shape().cond_channels));
  w.u32(static_cast<std::uint32_t>(net.time_features()));
  w.u32(static_cast<std::uint32_t>(net.hidden()));
  w.f32s(net.parameters());
  w.close();
}

ToyDenoiser read_toy_denoiser(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic("TDN1");
  PatchShape shape;
  shape.size = r.u32();
  shape.bands = r.u32();
  shape.cond_channels = r.u32();
  const std::uint32_t E = r.u32();
  const std::uint32_t H = r.u32();
  require(shape.size > 0 && shape.size <= 4096 && shape.bands > 0 && shape.bands <= 4096 && shape.cond_channels <= 3 &&
              E <= 4096 && H > 0 && H <= 1u << 20,
          "implausible toy denoiser header");
  ToyDenoiser net(shape, H, E);
  require(net.parameter_count() <= (1u << 28), "toy denoiser too large");
  net.parameters() = r.f32s(net.parameter_count());
  r.expect_end();
  for (double v : net.parameters()) require(std::isfinite(v), "non-finite toy denoiser weight");
  return net;
}

double eps_loss(const ToyDenoiser& net, const std::vector<NoisedExample>& batch, const DiffusionSchedule& s,
                const TrainConfig& config, std::vector<double>* grad) {
  require(!batch.empty(), "training batch is empty");
  if (grad) grad->assign(net.parameter_count(), 0.0);
  const double n_elem = static_cast<double>(net.output_size());
  const double n_batch = static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& ex : batch) {
    const auto in = net.input(ex.x_t, ex.t, ex.y_cond);
    const auto out = net.forward(in);
    const double w = min_snr_weight(s, ex.t, config.min_snr_k) / (n_elem * n_batch);
    std::vector<double> cot(out.size());
    double l = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double r = out[i] - ex.eps.data()[i];
      if (config.loss == EpsLoss::kL1) {
        l += std::abs(r);
        cot[i] = w * static_cast<double>((r > 0) - (r < 0));
      } else {
        l += r * r;
        cot[i] = 2.0 * w * r;
      }
    }
    total += w * l;
    if (grad) net.accumulate_parameter_grad(in, cot, *grad);
  }
  if (!std::isfinite(total)) throw NumericError("non-finite training loss");
  return total;
}

ToyTrainer::ToyTrainer(ToyDenoiser& net, DiffusionSchedule schedule, TrainConfig config, std::uint64_t seed)
    : net_(net), schedule_(std::move(schedule)), config_(config), rng_(keyed_engine({seed, 0x747261696eULL})) {
  require(config_.learning_rate > 0.0, "learning rate must be positive");
  m_.assign(net_.parameter_count(), 0.0);
  v_.assign(net_.parameter_count(), 0.0);
}

double ToyTrainer::train_step(const std::vector<std::pair<Array3, Array3>>& batch) {
  require(!batch.empty(), "training batch is empty");
  std::uniform_int_distribution<std::size_t> pick_t(1, schedule_.T());
  std::vector<NoisedExample> noised;
  noised.reserve(batch.size());
  for (const auto& [x0, y] : batch) {
    NoisedExample ex;
    ex.t = pick_t(rng_);
    ex.eps = Array3(x0.rows(), x0.cols(), x0.channels());
    fill_normal(ex.eps.flat(), rng_);
    ex.x_t = q_sample(x0, ex.t, ex.eps, schedule_);
    ex.y_cond = y;
    noised.push_back(std::move(ex));
  }
  std::vector<double> g;
  const double loss = eps_loss(net_, noised, schedule_, config_, &g);
  ++step_;
  auto& p = net_.parameters();
  const double lr = config_.learning_rate;
  if (config_.optimizer == Optimizer::kSgd) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
  } else {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t i = 0; i < p.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * g[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
  }
  return loss;
}

}  // namespace specdiff
