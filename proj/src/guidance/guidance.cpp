#include "specdiff/guidance/guidance.hpp"

#include <cmath>

#include "specdiff/core/error.hpp"
#include "specdiff/core/parallel.hpp"
#include "specdiff/core/rng.hpp"

namespace specdiff {

void GuidanceConfig::validate() const {
  require(std::isfinite(step_size) && step_size > 0.0, "guidance step size must be positive");
  require(samples >= 1, "need at least one sample");
  if (noise_aware) {
    require(std::isfinite(noise_sigma) && noise_sigma > 0.0, "noise-aware guidance needs a positive noise sigma");
    require(std::isfinite(tv_weight) && tv_weight >= 0.0, "TV weight must be >= 0");
  }
}

namespace {

std::size_t mirror(std::size_t i, std::size_t n) {
  if (i < n) return i;
  return n >= 2 ? n - 2 : n - 1;
}

}  // namespace

double total_variation(const Array3& img) {
  const std::size_t H = img.rows(), W = img.cols(), K = img.channels();
  double tv = 0.0;
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < W; ++c)
      for (std::size_t k = 0; k < K; ++k) {
        const double v = img(r, c, k);
        const double dx = img(r, mirror(c + 1, W), k) - v;
        const double dy = img(mirror(r + 1, H), c, k) - v;
        tv += std::sqrt(dx * dx + dy * dy);
      }
  return tv;
}

Array3 total_variation_grad(const Array3& img) {
  const std::size_t H = img.rows(), W = img.cols(), K = img.channels();
  Array3 g(H, W, K);
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < W; ++c)
      for (std::size_t k = 0; k < K; ++k) {
        const double v = img(r, c, k);
        const std::size_t cn = mirror(c + 1, W), rn = mirror(r + 1, H);
        const double dx = img(r, cn, k) - v;
        const double dy = img(rn, c, k) - v;
        const double m = std::sqrt(dx * dx + dy * dy);
        if (m < 1e-12) continue;
        g(r, c, k) -= (dx + dy) / m;
        g(r, cn, k) += dx / m;
        g(rn, c, k) += dy / m;
      }
  return g;
}

GuidanceProblem::GuidanceProblem(const MeasurementOperator& op, const Denoiser& denoiser,
                                 const DiffusionSchedule& schedule, PatchLayout layout, GuidanceConfig config)
    : op_(op), denoiser_(denoiser), schedule_(schedule), layout_(layout), config_(config) {
  config_.validate();
  const PatchShape s = denoiser_.shape();
  require(s.size == layout_.patch_size(), "denoiser patch size does not match the layout");
  require(s.bands == op_.grid().size(), "denoiser band count does not match the operator");
  require(layout_.height() == op_.scene_height() && layout_.width() == op_.scene_width(),
          "layout does not cover the operator's scene");
  if (config_.mode == GradientMode::kFullVjp && !denoiser_.has_vjp())
    throw ConfigError("full-vjp guidance needs a denoiser with a vector-Jacobian product");
}

std::vector<Array3> GuidanceProblem::conditioning(const Measurement& y) const {
  require(y.height() == op_.measurement_height() && y.width() == op_.measurement_width() &&
              y.channels() == op_.measurement_channels(),
          "measurement does not match the operator");
  const Array3 img = op_.conditioning(y);
  require(img.channels() == denoiser_.shape().cond_channels,
          "conditioning channels do not match the denoiser");
  PatchSet set = patch(img, layout_);
  if (denoiser_.domain() == PatchDomain::kNormalized)
    for (Array3& p : set.patches) p = normalize_patch(p, ZeroPatchPolicy::kPassThrough);
  return std::move(set.patches);
}

Array3 GuidanceProblem::to_physical(const Array3& model_patch) const {
  Array3 out = model_patch;
  const PatchDomain d = denoiser_.domain();
  for (double& v : out.flat()) v = specdiff::to_physical(d, v);
  return out;
}

PatchResponses render_patches(const MeasurementOperator& op, const PatchLayout& layout,
                              const std::vector<Array3>& physical) {
  const std::size_t p = layout.count();
  require(physical.size() == p, "one patch per layout position");
  PatchResponses out;
  out.footprints.resize(p);
  out.images.resize(p);
  parallel_for(p, [&](std::size_t i) {
    const Rect own = layout.owned_in_image(i);
    const auto [r0, c0] = layout.origin(i);
    const Array3& src = physical[i];
    require(src.rows() == layout.patch_size() && src.cols() == layout.patch_size(), "malformed patch");
    Array3 crop(static_cast<std::size_t>(own.height), static_cast<std::size_t>(own.width), src.channels());
    for (std::ptrdiff_t r = 0; r < own.height; ++r)
      for (std::ptrdiff_t c = 0; c < own.width; ++c) {
        auto from = src.pixel(static_cast<std::size_t>(own.row + r) - r0, static_cast<std::size_t>(own.col + c) - c0);
        std::copy(from.begin(), from.end(), crop.pixel(static_cast<std::size_t>(r), static_cast<std::size_t>(c)).begin());
      }
    op.apply_region(crop, own, out.images[i]);
    out.footprints[i] = op.footprint(own);
  });
  return out;
}

PatchResponses GuidanceProblem::responses(const std::vector<Array3>& physical) const {
  return render_patches(op_, layout_, physical);
}

std::vector<double> GuidanceProblem::solve_scales(const PatchResponses& resp, const Measurement& y) const {
  if (!config_.rescale) return std::vector<double>(resp.size(), 1.0);
  std::vector<double> c = GramSystem(resp, y).solve();
  if (config_.clamp_scales)
    for (double& v : c) v = std::max(v, 0.0);
  return c;
}

Measurement GuidanceProblem::assemble(const PatchResponses& resp, const std::vector<double>& scales) const {
  Measurement y_hat(op_.measurement_height(), op_.measurement_width(), op_.measurement_channels());
  for (std::size_t i = 0; i < resp.size(); ++i) {
    const Rect& f = resp.footprints[i];
    const Array3& img = resp.images[i];
    const double c = scales[i];
    for (std::ptrdiff_t r = 0; r < f.height; ++r)
      for (std::ptrdiff_t col = 0; col < f.width; ++col) {
        auto src = img.pixel(static_cast<std::size_t>(r), static_cast<std::size_t>(col));
        auto dst = y_hat.values().pixel(static_cast<std::size_t>(f.row + r), static_cast<std::size_t>(f.col + col));
        for (std::size_t k = 0; k < src.size(); ++k) dst[k] += c * src[k];
      }
  }
  return y_hat;
}

double GuidanceProblem::loss(const Measurement& y_hat, const Measurement& y, Measurement* grad) const {
  require(y_hat.values().same_shape(y.values()), "rendered estimate does not match the measurement");
  const auto a = y_hat.values().flat();
  const auto b = y.values().flat();
  const double w = config_.noise_aware ? 1.0 / (config_.noise_sigma * config_.noise_sigma) : 1.0;
  double l = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l += (a[i] - b[i]) * (a[i] - b[i]);
  l *= w;
  if (grad) {
    *grad = Measurement(y.height(), y.width(), y.channels());
    auto g = grad->values().flat();
    for (std::size_t i = 0; i < a.size(); ++i) g[i] = 2.0 * w * (a[i] - b[i]);
  }
  if (config_.noise_aware && config_.tv_weight > 0.0) {
    l += config_.tv_weight * total_variation(y_hat.values());
    if (grad) {
      const Array3 tg = total_variation_grad(y_hat.values());
      auto g = grad->values().flat();
      auto t = tg.flat();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += config_.tv_weight * t[i];
    }
  }
  return l;
}

GuidanceProblem::Evaluation GuidanceProblem::evaluate(const std::vector<Array3>& x_t, std::size_t t,
                                                      const std::vector<Array3>& cond,
                                                      const std::vector<Array3>& eps_in, const Measurement& y,
                                                      const std::vector<double>* fixed_scales) const {
  const std::size_t p = layout_.count();
  require(x_t.size() == p && cond.size() == p, "one state and conditioning patch per layout position");
  std::vector<Array3> eps = eps_in;
  if (eps.empty()) {
    eps.resize(p);
    parallel_for(p, [&](std::size_t i) { eps[i] = denoiser_.predict_eps(x_t[i], t, cond[i]); });
  }
  require(eps.size() == p, "one noise estimate per patch");

  std::vector<Array3> phys(p);
  parallel_for(p, [&](std::size_t i) { phys[i] = to_physical(x0_hat(x_t[i], eps[i], t, schedule_)); });
  const PatchResponses resp = responses(phys);

  Evaluation ev;
  if (fixed_scales) {
    require(fixed_scales->size() == p, "one scale per patch");
    ev.scales = *fixed_scales;
  } else {
    ev.scales = solve_scales(resp, y);
  }
  Measurement dy;
  ev.loss = loss(assemble(resp, ev.scales), y, &dy);

  const double a = schedule_.alpha(t);
  const double inv_sa = 1.0 / std::sqrt(a), sn = std::sqrt(1.0 - a);
  const double slope = physical_slope(denoiser_.domain());
  const std::size_t P = layout_.patch_size(), C = denoiser_.shape().bands;
  ev.gradient.resize(p);
  parallel_for(p, [&](std::size_t i) {
    const Rect own = layout_.owned_in_image(i);
    const Rect& f = resp.footprints[i];
    Array3 residual(static_cast<std::size_t>(f.height), static_cast<std::size_t>(f.width), dy.channels());
    for (std::ptrdiff_t r = 0; r < f.height; ++r)
      for (std::ptrdiff_t c = 0; c < f.width; ++c) {
        auto src = dy.values().pixel(static_cast<std::size_t>(f.row + r), static_cast<std::size_t>(f.col + c));
        std::copy(src.begin(), src.end(), residual.pixel(static_cast<std::size_t>(r), static_cast<std::size_t>(c)).begin());
      }
    Array3 g_own;
    op_.adjoint_region(residual, own, g_own);
    const auto [r0, c0] = layout_.origin(i);
    // Gradient with respect to the model-domain x0 estimate.
    Array3 u(P, P, C);
    const double k = ev.scales[i] * slope;
    for (std::ptrdiff_t r = 0; r < own.height; ++r)
      for (std::ptrdiff_t c = 0; c < own.width; ++c) {
        auto src = g_own.pixel(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        auto dst = u.pixel(static_cast<std::size_t>(own.row + r) - r0, static_cast<std::size_t>(own.col + c) - c0);
        for (std::size_t b = 0; b < C; ++b) dst[b] = k * src[b];
      }
    Array3 g = u;
    if (config_.mode == GradientMode::kFullVjp) {
      const Array3 j = denoiser_.vjp(x_t[i], t, cond[i], u);
      auto gv = g.flat();
      auto jv = j.flat();
      for (std::size_t q = 0; q < gv.size(); ++q) gv[q] -= sn * jv[q];
    }
    g *= inv_sa;
    ev.gradient[i] = std::move(g);
  });
  return ev;
}

std::vector<double> solve_scales(const PatchSet& physical, const Measurement& y, const MeasurementOperator& op) {
  return GramSystem(render_patches(op, physical.layout, physical.patches), y).solve();
}

void guided_update(std::vector<Array3>& x, const std::vector<Array3>& gradient, double step_size) {
  require(x.size() == gradient.size(), "one gradient per patch");
  double n2 = 0.0;
  for (const Array3& g : gradient) n2 += squared_norm(g.flat());
  const double n = std::sqrt(n2);
  if (!std::isfinite(n)) throw NumericError("non-finite guidance gradient");
  if (n < 1e-12) return;
  const double s = step_size / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i].same_shape(gradient[i]), "gradient does not match the state patch");
    auto xv = x[i].flat();
    auto gv = gradient[i].flat();
    for (std::size_t q = 0; q < xv.size(); ++q) xv[q] -= s * gv[q];
  }
}

Reconstruction reconstruct(const Measurement& y, const GuidanceProblem& problem, std::uint64_t seed) {
  const GuidanceConfig& cfg = problem.config();
  const PatchLayout& layout = problem.layout();
  const Denoiser& den = problem.denoiser();
  const DiffusionSchedule& sched = problem.schedule();
  const MeasurementOperator& op = problem.op();
  const std::size_t p = layout.count(), P = layout.patch_size(), C = den.shape().bands;
  const std::vector<Array3> cond = problem.conditioning(y);
  const auto& steps = sched.steps();

  Reconstruction out;
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    std::vector<Array3> x(p);
    parallel_for(p, [&](std::size_t i) {
      x[i] = Array3(P, P, C);
      auto rng = keyed_engine({seed, s, i, 0});
      fill_normal(x[i].flat(), rng);
    });
    std::vector<Array3> eps(p);
    for (std::size_t k = steps.size(); k-- > 0;) {
      const std::size_t t = steps[k], t_prev = k ? steps[k - 1] : 0;
      parallel_for(p, [&](std::size_t i) { eps[i] = den.predict_eps(x[i], t, cond[i]); });
      for (std::size_t j = 0; j < cfg.loops; ++j) {
        const auto ev = problem.evaluate(x, t, cond, eps, y);
        guided_update(x, ev.gradient, cfg.step_size);
        if (cfg.mode == GradientMode::kFullVjp)
          parallel_for(p, [&](std::size_t i) { eps[i] = den.predict_eps(x[i], t, cond[i]); });
      }
      parallel_for(p, [&](std::size_t i) {
        auto rng = keyed_engine({seed, s, i, t});
        x[i] = ddim_step(x[i], eps[i], t, t_prev, sched, rng);
      });
    }
    std::vector<Array3> phys(p);
    parallel_for(p, [&](std::size_t i) { phys[i] = problem.to_physical(x[i]); });
    std::vector<double> c = problem.solve_scales(problem.responses(phys), y);
    HsiCube cube(op.grid(), stitch(PatchSet(layout, std::move(phys), c)));
    const Measurement r = op.apply(cube);
    double res = 0.0;
    for (std::size_t q = 0; q < r.values().size(); ++q) {
      const double d = r.values().data()[q] - y.values().data()[q];
      res += d * d;
    }
    out.residuals.push_back(std::sqrt(res));
    out.scales.push_back(std::move(c));
    out.samples.push_back(std::move(cube));
  }

  Array3 mean(layout.height(), layout.width(), C);
  for (const HsiCube& c : out.samples) mean += c.values();
  mean *= 1.0 / static_cast<double>(out.samples.size());
  out.mean = HsiCube(op.grid(), std::move(mean));
  if (out.samples.size() >= 2) out.uncertainty = uncertainty(out.samples);
  return out;
}

Array3 uncertainty(const std::vector<HsiCube>& samples) {
  require(samples.size() >= 2, "uncertainty needs at least two samples");
  const Array3& first = samples.front().values();
  for (const HsiCube& s : samples) require(s.values().same_shape(first), "samples differ in shape");
  const std::size_t H = first.rows(), W = first.cols(), C = first.channels();
  const double n = static_cast<double>(samples.size());
  Array3 u(H, W, 1);
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < W; ++c) {
      double total = 0.0;
      for (std::size_t b = 0; b < C; ++b) {
        // Deviations from the first sample: exact zeros when all samples agree.
        double s1 = 0.0, s2 = 0.0;
        for (const HsiCube& smp : samples) {
          const double d = smp.values()(r, c, b) - first(r, c, b);
          s1 += d;
          s2 += d * d;
        }
        total += std::max((s2 - s1 * s1 / n) / (n - 1.0), 0.0);
      }
      u(r, c, 0) = total;
    }
  return u;
}

}  // namespace specdiff
