#include "specdiff/cli/commands.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "specdiff/cli/color.hpp"
#include "specdiff/cli/png.hpp"
#include "specdiff/core/error.hpp"
#include "specdiff/core/io.hpp"
#include "specdiff/core/patch.hpp"
#include "specdiff/core/rng.hpp"
#include "specdiff/diffusion/gaussian_denoiser.hpp"
#include "specdiff/diffusion/toy_denoiser.hpp"
#include "specdiff/metrics/metrics.hpp"
#include "specdiff/render/camera.hpp"
#include "specdiff/render/cassi.hpp"
#include "specdiff/render/noise.hpp"
#include "specdiff/saliency/saliency.hpp"

namespace specdiff {

namespace {

std::string num(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

void prepare_out(const std::filesystem::path& out) {
  if (out.empty()) throw ConfigError("--out is required");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
}

SensorResponse make_sensor(const std::string& name, const SpectralGrid& grid) {
  if (name == "panchromatic") return SensorResponse::panchromatic(grid);
  if (name == "rgb") return SensorResponse::rgb(grid);
  SensorResponse s = read_sensor(name);
  if (!s.grid().matches(grid, 1e-3)) throw ConfigError("sensor response grid does not match the PSF grid");
  return s;
}

std::size_t conditioning_channels(const MeasurementOperator& op) {
  const Measurement zero(op.measurement_height(), op.measurement_width(), op.measurement_channels());
  return op.conditioning(zero).channels();
}

Array3 measurement_png(const Measurement& y) {
  if (y.channels() == 3) return max_normalized(y.values());
  Array3 gray(y.height(), y.width(), 1);
  for (std::size_t r = 0; r < y.height(); ++r)
    for (std::size_t c = 0; c < y.width(); ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < y.channels(); ++k) s += y(r, c, k);
      gray(r, c, 0) = s;
    }
  return max_normalized(gray);
}

}  // namespace

CommandResult run_design_lens(const DesignLensOptions& o) {
  const LensPreset preset = parse_lens_preset(o.preset);
  prepare_out(o.out);
  const SpectralGrid grid = SpectralGrid::uniform(o.lambda_min_nm, o.lambda_max_nm, o.bands);
  const NanocylinderTable table = o.table.empty() ? proxy_nanocylinder_table() : read_nanocylinder_table(o.table);
  const SpectralPsf psf = design_lens(preset, grid, table, o.lens);
  write_psf(o.out / "psf.psf", psf);
  write_png(o.out / "psf.png", rgb_project(psf.grid(), psf.kernels()));
  CommandResult r;
  r.results["psf_sum"] = num(psf.kernels().sum());
  r.results["kernel_size"] = std::to_string(psf.size());
  return r;
}

std::unique_ptr<MeasurementOperator> make_operator(const OperatorOptions& o, std::size_t H, std::size_t W,
                                                   const SpectralGrid* scene_grid) {
  if (o.psf.empty() == o.cassi.empty()) throw ConfigError("give exactly one of --psf and --cassi");
  if (!o.psf.empty()) {
    SpectralPsf psf = read_psf(o.psf);
    if (scene_grid && !psf.grid().matches(*scene_grid, 1e-3))
      throw ConfigError("PSF wavelengths do not match the scene's spectral grid");
    SensorResponse sensor = make_sensor(o.sensor, psf.grid());
    return std::make_unique<PsfCamera>(std::move(psf), std::move(sensor), H, W);
  }
  if (o.sensor != "panchromatic") throw ConfigError("CASSI uses a panchromatic detector");
  CassiSpec spec;
  if (o.cassi == "default") {
    if (!scene_grid) throw ConfigError("--cassi default needs a scene; pass the CAS1 file written by render");
    spec = default_cassi(H, W, scene_grid->size(), o.cassi_step, o.seed);
  } else {
    spec = read_cassi(o.cassi);
  }
  if (spec.height != H || spec.width != W) throw ConfigError("CASSI mask does not match the scene size");
  if (scene_grid) {
    if (spec.bands() != scene_grid->size()) throw ConfigError("CASSI band count does not match the scene");
    return std::make_unique<CassiOperator>(std::move(spec), *scene_grid);
  }
  SpectralGrid grid = SpectralGrid::uniform(o.lambda_min_nm, o.lambda_max_nm, spec.bands());
  return std::make_unique<CassiOperator>(std::move(spec), std::move(grid));
}

std::unique_ptr<MeasurementOperator> operator_for_measurement(const OperatorOptions& o, const Measurement& y) {
  if (!o.cassi.empty() && o.psf.empty()) {
    if (o.cassi == "default") throw ConfigError("pass the CAS1 file written by render instead of 'default'");
    const CassiSpec spec = read_cassi(o.cassi);
    if (y.width() != spec.measurement_width() || y.height() != spec.height || y.channels() != 1)
      throw ConfigError("measurement size does not match the CASSI geometry");
    return make_operator(o, spec.height, spec.width, nullptr);
  }
  auto op = make_operator(o, y.height(), y.width(), nullptr);
  if (y.channels() != op->measurement_channels())
    throw ConfigError("measurement channels do not match the sensor");
  return op;
}

CommandResult run_render(const RenderOptions& o) {
  prepare_out(o.out);
  const HsiCube x = read_hsi(o.scene);
  OperatorOptions oo = o.op;
  oo.seed = o.seed;
  const auto op = make_operator(oo, x.height(), x.width(), &x.grid());
  Measurement y = op->apply(x);
  for (double& v : y.values().flat()) v = std::max(v, 0.0);
  CommandResult r;
  if (o.snr) {
    NoiseSpec noise{o.snr, 0.0, o.seed};
    r.results["noise_sigma"] = num(noise_sigma(y, noise));
    y = add_noise(y, noise);
  }
  write_measurement(o.out / "measurement.msr", y);
  write_png(o.out / "measurement.png", measurement_png(y));
  if (const auto* cassi = dynamic_cast<const CassiOperator*>(op.get())) {
    write_cassi(o.out / "cassi.cas", cassi->spec());
    r.results["cassi_file"] = (o.out / "cassi.cas").string();
  }
  r.results["measurement_file"] = (o.out / "measurement.msr").string();
  return r;
}

std::unique_ptr<Denoiser> make_denoiser(const PriorOptions& o, const MeasurementOperator& op, std::size_t patch,
                                        const DiffusionSchedule& schedule) {
  const std::size_t C = op.grid().size(), S = conditioning_channels(op);
  if (!o.denoiser.empty()) {
    auto net = std::make_unique<ToyDenoiser>(read_toy_denoiser(o.denoiser));
    if (!(net->shape() == PatchShape{patch, C, S}))
      throw ConfigError("denoiser checkpoint does not match the patch size, bands or conditioning channels");
    return net;
  }
  require(o.stddev > 0.0 && o.corr_nm > 0.0 && o.tau >= 0.0, "prior parameters must be positive");
  Eigen::MatrixXd cov(C, C);
  for (std::size_t i = 0; i < C; ++i)
    for (std::size_t j = 0; j < C; ++j)
      cov(i, j) = o.stddev * o.stddev * std::exp(-std::abs(op.grid()[i] - op.grid()[j]) / o.corr_nm);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("prior covariance is not positive definite");
  Eigen::MatrixXd B(S, C);
  if (const auto* cam = dynamic_cast<const PsfCamera*>(&op)) {
    const Array3& k = cam->psf().kernels();
    for (std::size_t b = 0; b < C; ++b) {
      double mass = 0.0;
      for (std::size_t u = 0; u < k.rows(); ++u)
        for (std::size_t v = 0; v < k.cols(); ++v) mass += k(u, v, b);
      for (std::size_t s = 0; s < S; ++s) B(s, b) = cam->sensor().weight(s, b) * mass;
    }
  } else if (const auto* cassi = dynamic_cast<const CassiOperator*>(&op)) {
    // Each deshear channel sees every band through the mask; a pixel-local
    // model can only use the mask density.
    double density = 0.0;
    for (auto m : cassi->spec().mask) density += m;
    density /= static_cast<double>(cassi->spec().mask.size());
    B = Eigen::MatrixXd::Constant(S, C, density);
  } else {
    throw ConfigError("the analytic prior supports PSF cameras and CASSI only");
  }
  return std::make_unique<GaussianPriorDenoiser>(GaussianPriorDenoiser::pixel_separable(
      {patch, C, S}, Eigen::VectorXd::Constant(C, o.mean), llt.matrixL(), B, o.tau, schedule));
}

GuidanceConfig guidance_config(const ReconstructOptions& o, const Measurement& y) {
  GuidanceConfig cfg;
  cfg.samples = o.samples;
  cfg.step_size = o.step_size;
  cfg.tv_weight = o.tv_weight;
  if (o.grad_mode == "frozen")
    cfg.mode = GradientMode::kFrozen;
  else if (o.grad_mode == "full")
    cfg.mode = GradientMode::kFullVjp;
  else
    throw ConfigError("--grad-mode must be 'frozen' or 'full'");
  if (o.snr) {
    cfg.noise_aware = true;
    cfg.noise_sigma = noise_sigma(y, NoiseSpec{o.snr, 0.0, 0});
    cfg.loops = GuidanceConfig::kNoiseAwareLoops;
  }
  if (o.loops) cfg.loops = *o.loops;
  if (o.no_guidance) cfg.loops = 0;
  cfg.validate();
  return cfg;
}

CommandResult run_reconstruct(const ReconstructOptions& o) {
  prepare_out(o.out);
  const Measurement y = read_measurement(o.measurement);
  const auto op = operator_for_measurement(o.op, y);
  const DiffusionSchedule schedule = make_schedule(1000, 1e-4, 0.02, o.ddim_steps, o.eta);
  const auto denoiser = make_denoiser(o.prior, *op, o.patch, schedule);
  const PatchLayout layout(op->scene_height(), op->scene_width(), o.patch, o.stride ? o.stride : o.patch);
  const GuidanceConfig cfg = guidance_config(o, y);
  const GuidanceProblem problem(*op, *denoiser, schedule, layout, cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const Reconstruction rec = reconstruct(y, problem, o.seed);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  CommandResult r;
  for (std::size_t s = 0; s < rec.samples.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%03zu.hsi", s);
    write_hsi(o.out / name, rec.samples[s]);
    r.results["residual_" + std::to_string(s)] = num(rec.residuals[s]);
  }
  write_hsi(o.out / "mean.hsi", rec.mean);
  write_png(o.out / "mean.png", rgb_project(rec.mean));
  if (rec.samples.size() > 1) {
    write_measurement(o.out / "uncertainty.msr", Measurement(rec.uncertainty));
    write_png(o.out / "uncertainty.png", max_normalized(rec.uncertainty));
  } else {
    r.warnings.push_back("one sample requested: no uncertainty map is written");
  }
  r.results["guidance_loops"] = std::to_string(cfg.loops);
  r.results["noise_aware"] = cfg.noise_aware ? "true" : "false";
  r.results["seconds"] = num(seconds);
  return r;
}

CommandResult run_metrics(const MetricsOptions& o) {
  prepare_out(o.out);
  const HsiCube x = read_hsi(o.truth), xh = read_hsi(o.estimate);
  if (!x.values().same_shape(xh.values())) throw ConfigError("truth and estimate differ in shape");
  CommandResult r;
  std::vector<std::pair<std::string, double>> rows;
  const MetricReport full = full_metrics(x, xh);
  rows.push_back({"psnr", full.psnr});
  rows.push_back({"sam", full.sam});
  if (full.ssim) rows.push_back({"ssim", *full.ssim});
  rows.push_back({"sam_excluded", static_cast<double>(full.sam_excluded)});
  const double excluded = static_cast<double>(full.sam_excluded) / static_cast<double>(x.height() * x.width());
  if (excluded > 0.01)
    r.warnings.push_back("SAM skipped " + std::to_string(full.sam_excluded) + " pixels with all-zero spectra");
  if (!o.uncertainty.empty()) {
    const Array3 unc = read_measurement(o.uncertainty).values();
    for (double keep : o.keep) {
      const MetricReport m = masked_metrics(x, xh, unc, keep);
      const std::string tag = "@" + num(keep);
      rows.push_back({"psnr" + tag, m.psnr});
      rows.push_back({"sam" + tag, m.sam});
      rows.push_back({"kept_fraction" + tag, m.kept_fraction});
    }
    rows.push_back({"pearson", uncertainty_error_correlation(unc, x, xh, 10000, o.seed)});
  }
  write_metrics_csv(o.out / "metrics.csv", rows, o.config_hash);
  for (const auto& [k, v] : rows) r.results[k] = num(v);
  return r;
}

CommandResult run_saliency(const SaliencyOptions& o) {
  if (o.eta != 0.0) throw ConfigError("saliency needs deterministic sampling; use --eta 0");
  prepare_out(o.out);
  const Measurement y = read_measurement(o.measurement);
  const auto op = operator_for_measurement(o.op, y);
  const DiffusionSchedule schedule = make_schedule(1000, 1e-4, 0.02, o.ddim_steps, 0.0);
  const auto denoiser = make_denoiser(o.prior, *op, o.patch, schedule);
  const auto patches = random_patches(op->conditioning(y), o.patch, o.patches, o.seed);
  const std::size_t rr = o.ref_row.value_or(o.patch / 2), rc = o.ref_col.value_or(o.patch / 2);
  const Array3 map = saliency_map(*denoiser, schedule, patches, rr, rc, o.seed);
  const SpectralGrid& g = op->grid();
  write_psf(o.out / "saliency.psf", saliency_as_psf(map, 0.5 * (g[0] + g[g.size() - 1])));
  write_png(o.out / "saliency.png", max_normalized(map));
  CommandResult r;
  r.results["saliency_max"] = num(map.max());
  return r;
}

CommandResult run_train_toy(const TrainToyOptions& o) {
  if (o.scenes.empty()) throw ConfigError("train-toy needs at least one --scene");
  if (o.steps == 0 || o.batch == 0) throw ConfigError("--steps and --batch must be positive");
  TrainConfig tc;
  tc.learning_rate = o.learning_rate;
  if (o.loss == "l1")
    tc.loss = EpsLoss::kL1;
  else if (o.loss == "l2")
    tc.loss = EpsLoss::kL2;
  else
    throw ConfigError("--loss must be 'l1' or 'l2'");
  if (o.optimizer == "adam")
    tc.optimizer = Optimizer::kAdam;
  else if (o.optimizer == "sgd")
    tc.optimizer = Optimizer::kSgd;
  else
    throw ConfigError("--optimizer must be 'adam' or 'sgd'");
  prepare_out(o.out);

  struct Pair {
    Array3 x, cond;
  };
  std::vector<Pair> data;
  OperatorOptions oo = o.op;
  oo.seed = o.seed;
  std::optional<SpectralGrid> grid;
  for (const auto& path : o.scenes) {
    const HsiCube x = read_hsi(path);
    if (grid && !grid->matches(x.grid(), 1e-3)) throw ConfigError("training scenes use different spectral grids");
    grid = x.grid();
    if (x.height() < o.patch || x.width() < o.patch) throw ConfigError("training scene smaller than the patch");
    const auto op = make_operator(oo, x.height(), x.width(), &x.grid());
    data.push_back({x.values(), op->conditioning(op->apply(x))});
  }
  const std::size_t C = grid->size(), S = data.front().cond.channels();
  ToyDenoiser net({o.patch, C, S}, o.hidden, o.time_features);
  auto init = keyed_engine({o.seed, 0x696e6974ULL});
  net.initialize(init);
  ToyTrainer trainer(net, make_schedule(), tc, o.seed);

  auto rng = keyed_engine({o.seed, 0x63726f70ULL});
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  const auto crop = [&](const Array3& a, std::size_t r0, std::size_t c0) {
    Array3 p(o.patch, o.patch, a.channels());
    for (std::size_t r = 0; r < o.patch; ++r)
      for (std::size_t c = 0; c < o.patch; ++c)
        for (std::size_t k = 0; k < a.channels(); ++k) p(r, c, k) = a(r0 + r, c0 + c, k);
    return p;
  };
  double first = 0.0, last = 0.0;
  for (std::size_t step = 0; step < o.steps; ++step) {
    std::vector<std::pair<Array3, Array3>> batch;
    while (batch.size() < o.batch) {
      const Pair& d = data[pick(rng)];
      std::uniform_int_distribution<std::size_t> rr(0, d.x.rows() - o.patch), cc(0, d.x.cols() - o.patch);
      const std::size_t r0 = rr(rng), c0 = cc(rng);
      batch.push_back(normalize_pair(crop(d.x, r0, c0), crop(d.cond, r0, c0), ZeroPatchPolicy::kPassThrough));
    }
    last = trainer.train_step(batch);
    if (step == 0) first = last;
  }
  write_toy_denoiser(o.out / "denoiser.tdn", net);
  CommandResult r;
  r.results["loss_first"] = num(first);
  r.results["loss_last"] = num(last);
  return r;
}

}  // namespace specdiff
