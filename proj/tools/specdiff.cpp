// specdiff: design lenses, render measurements, reconstruct, evaluate.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "specdiff/cli/commands.hpp"
#include "specdiff/core/error.hpp"
#include "specdiff/core/manifest.hpp"
#include "specdiff/core/parallel.hpp"

using namespace specdiff;

namespace {

// Keys a run manifest carries that are not flags.
bool is_bookkeeping(const std::string& key) {
  return key == "command" || key == "config_hash" || key.rfind("result.", 0) == 0;
}

std::string option_key(const CLI::Option* opt) { return opt->get_lnames().empty() ? "" : opt->get_lnames().front(); }

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Expand --config FILE into flags placed before the user's own, so explicit
// flags win (options take the last value given).
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args.front());
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::vector<std::string> injected;
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string file;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      continue;
    }
    --i;
    const Manifest m = read_manifest(file);
    if (auto it = m.find("command"); it != m.end() && it->second != args.front())
      throw ConfigError("manifest was written by '" + it->second + "', not '" + args.front() + "'");
    for (const auto& [key, value] : m) {
      if (is_bookkeeping(key)) continue;
      const CLI::Option* opt = sub->get_option_no_throw("--" + key);
      if (!opt) throw ConfigError("unknown manifest key for " + args.front() + ": " + key);
      if (opt->get_expected_min() == 0) {
        if (value == "true") injected.push_back("--" + key);
        else if (value != "false") throw ConfigError("flag " + key + " must be true or false");
        continue;
      }
      for (const auto& w : split_words(value)) {
        injected.push_back("--" + key);
        injected.push_back(w);
      }
    }
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

Manifest effective_config(const CLI::App& sub) {
  Manifest m;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string key = option_key(opt);
    if (key.empty() || key == "help" || key == "config") continue;
    if (opt->get_expected_min() == 0) {
      m[key] = opt->count() ? "true" : "false";
      continue;
    }
    std::string value;
    if (opt->count()) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : " ") + r;
    } else {
      value = opt->get_default_str();
    }
    if (!value.empty()) m[key] = value;
  }
  return m;
}

std::string config_hash(Manifest m) {
  m.erase("out");
  m.erase("workers");
  return manifest_hash(m);
}

void add_operator(CLI::App* sub, OperatorOptions& o) {
  sub->add_option("--psf", o.psf, "PSF1 file");
  sub->add_option("--cassi", o.cassi, "CAS1 file, or 'default' when rendering");
  sub->add_option("--sensor", o.sensor, "panchromatic | rgb | SNS1 file")->capture_default_str();
  sub->add_option("--cassi-step", o.cassi_step, "per-band CASSI shear step")->capture_default_str();
  sub->add_option("--lambda-min", o.lambda_min_nm, "CASSI grid start (nm)")->capture_default_str();
  sub->add_option("--lambda-max", o.lambda_max_nm, "CASSI grid end (nm)")->capture_default_str();
}

void add_prior(CLI::App* sub, PriorOptions& o) {
  sub->add_option("--denoiser", o.denoiser, "TDN1 checkpoint; default is the analytic Gaussian prior");
  sub->add_option("--prior-mean", o.mean)->capture_default_str();
  sub->add_option("--prior-std", o.stddev)->capture_default_str();
  sub->add_option("--prior-corr-nm", o.corr_nm)->capture_default_str();
  sub->add_option("--prior-tau", o.tau, "conditioning noise of the analytic prior")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Snapshot hyperspectral simulation and patch-diffusion reconstruction"};
  app.option_defaults()->take_last();
  app.require_subcommand(1);
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  std::string out;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed)->capture_default_str();
    sub->add_option("--workers", workers, "worker threads (SPECDIFF_THREADS wins)")->capture_default_str();
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--config", "key=value manifest of flag values");
  };

  DesignLensOptions dl;
  auto* design = app.add_subcommand("design-lens", "Build a metalens preset and its spectral PSF");
  design->add_option("--preset", dl.preset, "AIF L1 L2 L4 L4S L8S")->capture_default_str();
  design->add_option("--bands", dl.bands)->capture_default_str();
  design->add_option("--lambda-min", dl.lambda_min_nm)->capture_default_str();
  design->add_option("--lambda-max", dl.lambda_max_nm)->capture_default_str();
  design->add_option("--table", dl.table, "NCT1 nanocylinder table");
  design->add_option("--cells", dl.lens.cells)->capture_default_str();
  design->add_option("--kernel", dl.lens.fresnel.kernel_size)->capture_default_str();
  design->add_option("--distance", dl.lens.fresnel.distance_m, "lens to sensor (m)")->capture_default_str();
  design->add_option("--pixel-pitch", dl.lens.fresnel.sensor_pitch_m, "sensor pitch (m)")->capture_default_str();
  design->add_option("--binning", dl.lens.fresnel.cell_binning)->capture_default_str();
  design->add_option("--shift", dl.lens.shift_m, "focal offset of sheared presets (m)")->capture_default_str();
  common(design);

  RenderOptions rd;
  auto* render = app.add_subcommand("render", "Render a scene through a PSF camera or CASSI");
  render->add_option("--scene", rd.scene, "HSI1 file")->required();
  add_operator(render, rd.op);
  render->add_option("--snr", rd.snr, "add Gaussian noise with sigma = mean / snr");
  common(render);

  ReconstructOptions rc;
  auto* recon = app.add_subcommand("reconstruct", "Guided patch-diffusion reconstruction");
  recon->add_option("--measurement", rc.measurement, "MSR1 file")->required();
  add_operator(recon, rc.op);
  add_prior(recon, rc.prior);
  recon->add_option("--patch", rc.patch)->capture_default_str();
  recon->add_option("--stride", rc.stride, "0 means the patch size")->capture_default_str();
  recon->add_option("--ddim-steps", rc.ddim_steps)->capture_default_str();
  recon->add_option("--eta", rc.eta, "DDIM eta")->capture_default_str();
  recon->add_option("--guidance-loops", rc.loops, "default 10, or 4 with --snr");
  recon->add_option("--step-size", rc.step_size, "guidance step length")->capture_default_str();
  recon->add_option("--samples", rc.samples)->capture_default_str();
  recon->add_option("--snr", rc.snr, "measurement SNR; switches on noise-aware guidance");
  recon->add_option("--tv-weight", rc.tv_weight)->capture_default_str();
  recon->add_option("--grad-mode", rc.grad_mode, "frozen | full")->capture_default_str();
  recon->add_flag("--no-guidance", rc.no_guidance);
  common(recon);

  MetricsOptions mt;
  auto* metrics = app.add_subcommand("metrics", "PSNR, SAM, SSIM and uncertainty-masked metrics");
  metrics->add_option("--truth", mt.truth)->required();
  metrics->add_option("--estimate", mt.estimate)->required();
  metrics->add_option("--uncertainty", mt.uncertainty, "MSR1 uncertainty map");
  metrics->add_option("--keep", mt.keep, "kept fractions for masked metrics")->take_all()->capture_default_str();
  metrics->add_option("--config-hash", mt.config_hash, "defaults to the estimate's run manifest hash");
  common(metrics);

  SaliencyOptions sl;
  auto* saliency = app.add_subcommand("saliency", "Perturbation saliency of a patch denoiser");
  saliency->add_option("--measurement", sl.measurement)->required();
  add_operator(saliency, sl.op);
  add_prior(saliency, sl.prior);
  saliency->add_option("--patch", sl.patch)->capture_default_str();
  saliency->add_option("--ref-row", sl.ref_row);
  saliency->add_option("--ref-col", sl.ref_col);
  saliency->add_option("--patches", sl.patches)->capture_default_str();
  saliency->add_option("--ddim-steps", sl.ddim_steps)->capture_default_str();
  saliency->add_option("--eta", sl.eta, "must be 0")->capture_default_str();
  common(saliency);

  TrainToyOptions tt;
  auto* train = app.add_subcommand("train-toy", "Train the small MLP denoiser on rendered scenes");
  train->add_option("--scene", tt.scenes, "HSI1 files")->required()->take_all();
  add_operator(train, tt.op);
  train->add_option("--patch", tt.patch)->capture_default_str();
  train->add_option("--hidden", tt.hidden)->capture_default_str();
  train->add_option("--time-features", tt.time_features)->capture_default_str();
  train->add_option("--steps", tt.steps)->capture_default_str();
  train->add_option("--batch", tt.batch)->capture_default_str();
  train->add_option("--lr", tt.learning_rate)->capture_default_str();
  train->add_option("--loss", tt.loss, "l1 | l2")->capture_default_str();
  train->add_option("--optimizer", tt.optimizer, "adam | sgd")->capture_default_str();
  common(train);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    set_worker_count(workers);
    CLI::App* sub = app.get_subcommands().front();
    Manifest config = effective_config(*sub);
    CommandResult result;
    if (sub == design) {
      dl.lens.seed = seed;
      dl.out = out;
      result = run_design_lens(dl);
    } else if (sub == render) {
      rd.seed = seed;
      rd.out = out;
      result = run_render(rd);
    } else if (sub == recon) {
      rc.seed = seed;
      rc.op.seed = seed;
      rc.out = out;
      result = run_reconstruct(rc);
    } else if (sub == metrics) {
      mt.seed = seed;
      mt.out = out;
      if (mt.config_hash.empty()) {
        const auto run = std::filesystem::path(mt.estimate).parent_path() / "manifest.txt";
        if (std::filesystem::exists(run)) {
          const Manifest m = read_manifest(run);
          if (auto it = m.find("config_hash"); it != m.end()) mt.config_hash = it->second;
        }
        if (mt.config_hash.empty()) mt.config_hash = config_hash(config);
      }
      result = run_metrics(mt);
    } else if (sub == saliency) {
      sl.seed = seed;
      sl.op.seed = seed;
      sl.out = out;
      result = run_saliency(sl);
    } else {
      tt.seed = seed;
      tt.out = out;
      result = run_train_toy(tt);
    }
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    config["config_hash"] = config_hash(config);
    config["command"] = sub->get_name();
    for (const auto& [k, v] : result.results) config["result." + k] = v;
    write_manifest(std::filesystem::path(out) / "manifest.txt", config);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
