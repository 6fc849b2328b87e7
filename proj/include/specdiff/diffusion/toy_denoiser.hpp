#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "specdiff/diffusion/denoiser.hpp"
#include "specdiff/diffusion/schedule.hpp"

namespace specdiff {

/// eps = W2 tanh(W1 [x_t; y; e(t)] + b1) + b2, with e(t) sinusoidal time
/// features. Works on normalized patches.
class ToyDenoiser final : public Denoiser {
 public:
  ToyDenoiser(PatchShape shape, std::size_t hidden, std::size_t time_features);

  PatchShape shape() const override { return shape_; }
  PatchDomain domain() const override { return PatchDomain::kNormalized; }
  Array3 predict_eps(const Array3& x_t, std::size_t t, const Array3& y_cond) const override;
  bool has_vjp() const override { return true; }
  Array3 vjp(const Array3& x_t, std::size_t t, const Array3& y_cond, const Array3& cotangent) const override;

  std::size_t hidden() const { return hidden_; }
  std::size_t time_features() const { return time_features_; }
  std::size_t input_size() const { return shape_.values() + shape_.size * shape_.size * shape_.cond_channels + time_features_; }
  std::size_t output_size() const { return shape_.values(); }
  std::size_t parameter_count() const { return params_.size(); }
  /// Flat parameter vector: W1 (hidden x input), b1, W2 (output x hidden), b2.
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  /// Glorot-style uniform init for weights, zero biases.
  void initialize(std::mt19937_64& rng);

  /// Network input for (x_t, t, y).
  std::vector<double> input(const Array3& x_t, std::size_t t, const Array3& y_cond) const;
  /// Forward on a prepared input; `hidden_out` receives tanh activations.
  std::vector<double> forward(const std::vector<double>& in, std::vector<double>* hidden_out = nullptr) const;
  /// Accumulate d<out, cot>/d params into `grad` for one prepared input.
  void accumulate_parameter_grad(const std::vector<double>& in, const std::vector<double>& cot,
                                 std::vector<double>& grad) const;

 private:
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return hidden_ * input_size(); }
  std::size_t w2() const { return b1() + hidden_; }
  std::size_t b2() const { return w2() + output_size() * hidden_; }

  PatchShape shape_;
  std::size_t hidden_, time_features_;
  std::vector<double> params_;
};

/// "TDN1", u32 P, C, S, time features, hidden; f32 W1, b1, W2, b2 row-major.
void write_toy_denoiser(const std::filesystem::path& path, const ToyDenoiser& net);
ToyDenoiser read_toy_denoiser(const std::filesystem::path& path);

enum class EpsLoss { kL1, kL2 };
enum class Optimizer { kSgd, kAdam };

struct TrainConfig {
  double learning_rate = 1e-3;
  double min_snr_k = 5.0;
  EpsLoss loss = EpsLoss::kL1;
  Optimizer optimizer = Optimizer::kAdam;
};

/// One training example after noising: the network sees (x_t, t, y) and
/// is scored against eps.
struct NoisedExample {
  Array3 x_t;
  Array3 y_cond;
  Array3 eps;
  std::size_t t = 1;
};

/// Batch-mean of weighted per-example eps losses (mean over elements), and
/// its gradient with respect to the parameters.
double eps_loss(const ToyDenoiser& net, const std::vector<NoisedExample>& batch, const DiffusionSchedule& s,
                const TrainConfig& config, std::vector<double>* grad);

/// Stateful trainer: draws t uniformly and eps ~ N(0, I) per example, then
/// takes one optimizer step.
class ToyTrainer {
 public:
  ToyTrainer(ToyDenoiser& net, DiffusionSchedule schedule, TrainConfig config, std::uint64_t seed);
  /// (x0 patch, y patch) pairs, already normalized. Returns the batch loss.
  double train_step(const std::vector<std::pair<Array3, Array3>>& batch);
  std::size_t steps_taken() const { return step_; }

 private:
  ToyDenoiser& net_;
  DiffusionSchedule schedule_;
  TrainConfig config_;
  std::mt19937_64 rng_;
  std::vector<double> m_, v_;
  std::size_t step_ = 0;
};

}  // namespace specdiff
