#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "specdiff/cli/lens_presets.hpp"
#include "specdiff/core/manifest.hpp"
#include "specdiff/diffusion/denoiser.hpp"
#include "specdiff/diffusion/schedule.hpp"
#include "specdiff/guidance/guidance.hpp"
#include "specdiff/render/operator.hpp"

namespace specdiff {

/// What each command hands back to the front end: result fields for the
/// run manifest and warnings for stderr.
struct CommandResult {
  Manifest results;
  std::vector<std::string> warnings;
};

struct DesignLensOptions {
  std::string preset = "L4S";
  std::size_t bands = 31;
  double lambda_min_nm = 400.0;
  double lambda_max_nm = 700.0;
  std::string table;  // NCT1 file; empty uses the built-in proxy table
  LensOptions lens;
  std::filesystem::path out;
};
CommandResult run_design_lens(const DesignLensOptions& o);

/// Either a PSF camera (psf + sensor) or a CASSI operator. `cassi` is a CAS1
/// path, or "default" to build the standard random mask for the scene.
struct OperatorOptions {
  std::string psf;
  std::string cassi;
  std::string sensor = "panchromatic";  // panchromatic | rgb | SNS1 path
  int cassi_step = 1;
  double lambda_min_nm = 450.0;  // CASSI grid when no scene is at hand
  double lambda_max_nm = 650.0;
  std::uint64_t seed = 0;
};

/// Operator for a scene of the given size. With `scene_grid`, the optics
/// must sample the same wavelengths.
std::unique_ptr<MeasurementOperator> make_operator(const OperatorOptions& o, std::size_t height, std::size_t width,
                                                   const SpectralGrid* scene_grid);
/// Operator matching an existing measurement.
std::unique_ptr<MeasurementOperator> operator_for_measurement(const OperatorOptions& o, const Measurement& y);

struct RenderOptions {
  std::string scene;
  OperatorOptions op;
  std::optional<double> snr;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};
CommandResult run_render(const RenderOptions& o);

/// Denoiser source: a TDN1 checkpoint, or the analytic pixel-separable
/// Gaussian prior (mean, exponential spectral correlation, local response).
struct PriorOptions {
  std::string denoiser;
  double mean = 0.5;
  double stddev = 0.25;
  double corr_nm = 60.0;
  double tau = 0.02;
};
std::unique_ptr<Denoiser> make_denoiser(const PriorOptions& o, const MeasurementOperator& op, std::size_t patch,
                                        const DiffusionSchedule& schedule);

struct ReconstructOptions {
  std::string measurement;
  OperatorOptions op;
  PriorOptions prior;
  std::size_t patch = 64;
  std::size_t stride = 0;  // 0 = patch size
  std::size_t ddim_steps = 50;
  double eta = 0.0;  // DDIM
  std::optional<std::size_t> loops;
  double step_size = 1.0;
  std::size_t samples = 10;
  std::uint64_t seed = 0;
  std::optional<double> snr;
  double tv_weight = 1e2;
  std::string grad_mode = "frozen";  // frozen | full
  bool no_guidance = false;
  std::filesystem::path out;
};
GuidanceConfig guidance_config(const ReconstructOptions& o, const Measurement& y);
CommandResult run_reconstruct(const ReconstructOptions& o);

struct MetricsOptions {
  std::string truth;
  std::string estimate;
  std::string uncertainty;  // optional MSR1 map, H x W x 1
  std::vector<double> keep{1.0, 0.95};
  std::uint64_t seed = 0;
  std::string config_hash;
  std::filesystem::path out;
};
CommandResult run_metrics(const MetricsOptions& o);

struct SaliencyOptions {
  std::string measurement;
  OperatorOptions op;
  PriorOptions prior;
  std::size_t patch = 16;
  std::optional<std::size_t> ref_row, ref_col;  // default: patch center
  std::size_t patches = 20;
  std::size_t ddim_steps = 50;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};
CommandResult run_saliency(const SaliencyOptions& o);

struct TrainToyOptions {
  std::vector<std::string> scenes;
  OperatorOptions op;
  std::size_t patch = 8;
  std::size_t hidden = 64;
  std::size_t time_features = 16;
  std::size_t steps = 500;
  std::size_t batch = 16;
  double learning_rate = 1e-3;
  std::string loss = "l1";
  std::string optimizer = "adam";
  std::uint64_t seed = 0;
  std::filesystem::path out;
};
CommandResult run_train_toy(const TrainToyOptions& o);

}  // namespace specdiff
