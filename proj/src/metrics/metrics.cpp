#include "specdiff/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "specdiff/core/error.hpp"
#include "specdiff/core/parallel.hpp"
#include "specdiff/core/rng.hpp"

namespace specdiff {

namespace {

void check_pair(const HsiCube& x, const HsiCube& y) {
  require(x.values().same_shape(y.values()), "cubes differ in shape");
  require(x.values().size() > 0, "cubes are empty");
}

double shared_peak(const HsiCube& x, const HsiCube& y) { return std::max(x.values().max(), y.values().max()); }

double psnr_over(const HsiCube& x, const HsiCube& y, const std::vector<std::size_t>& pixels, double peak) {
  const std::size_t C = x.bands();
  std::vector<double> se(C, 0.0);
  for (std::size_t p : pixels) {
    const double* a = x.values().data() + p * C;
    const double* b = y.values().data() + p * C;
    for (std::size_t k = 0; k < C; ++k) se[k] += (a[k] - b[k]) * (a[k] - b[k]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < C; ++k) {
    const double mse = se[k] / static_cast<double>(pixels.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    sum += 10.0 * std::log10(peak / mse);
  }
  return sum / static_cast<double>(C);
}

SamResult sam_over(const HsiCube& x, const HsiCube& y, const std::vector<std::size_t>& pixels) {
  const std::size_t C = x.bands();
  SamResult r;
  r.pixels = pixels.size();
  double total = 0.0;
  for (std::size_t p : pixels) {
    const double* a = x.values().data() + p * C;
    const double* b = y.values().data() + p * C;
    double aa = 0.0, bb = 0.0;
    for (std::size_t k = 0; k < C; ++k) {
      aa += a[k] * a[k];
      bb += b[k] * b[k];
    }
    if (aa == 0.0 || bb == 0.0) {
      ++r.excluded;
      continue;
    }
    // Same angle as acos of the normalized inner product, without its
    // loss of precision near 0 and pi.
    const double na = std::sqrt(aa), nb = std::sqrt(bb);
    double dd = 0.0, ss = 0.0;
    for (std::size_t k = 0; k < C; ++k) {
      const double u = a[k] / na, v = b[k] / nb;
      dd += (u - v) * (u - v);
      ss += (u + v) * (u + v);
    }
    total += 2.0 * std::atan2(std::sqrt(dd), std::sqrt(ss));
  }
  const std::size_t used = r.pixels - r.excluded;
  r.mean = used ? total / static_cast<double>(used) : 0.0;
  return r;
}

std::vector<std::size_t> all_pixels(const HsiCube& x) {
  std::vector<std::size_t> p(x.height() * x.width());
  std::iota(p.begin(), p.end(), 0);
  return p;
}

constexpr std::size_t kWindow = 11;

std::vector<double> gaussian_window() {
  std::vector<double> w(kWindow);
  double s = 0.0;
  for (std::size_t i = 0; i < kWindow; ++i) {
    const double d = static_cast<double>(i) - 5.0;
    w[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    s += w[i];
  }
  for (double& v : w) v /= s;
  return w;
}

// Separable weighted mean of `img` over every fully-contained window.
std::vector<double> window_mean(const std::vector<double>& img, std::size_t H, std::size_t W,
                                const std::vector<double>& w) {
  const std::size_t oh = H - kWindow + 1, ow = W - kWindow + 1;
  std::vector<double> rows(H * ow, 0.0), out(oh * ow, 0.0);
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) s += w[k] * img[r * W + c + k];
      rows[r * ow + c] = s;
    }
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) s += w[k] * rows[(r + k) * ow + c];
      out[r * ow + c] = s;
    }
  return out;
}

}  // namespace

double psnr(const HsiCube& x, const HsiCube& x_hat) {
  check_pair(x, x_hat);
  return psnr_over(x, x_hat, all_pixels(x), shared_peak(x, x_hat));
}

SamResult sam(const HsiCube& x, const HsiCube& x_hat) {
  check_pair(x, x_hat);
  return sam_over(x, x_hat, all_pixels(x));
}

double ssim_mean(const HsiCube& x, const HsiCube& x_hat) {
  check_pair(x, x_hat);
  const std::size_t H = x.height(), W = x.width(), C = x.bands();
  if (H < kWindow || W < kWindow) throw ConfigError("SSIM needs images of at least 11 x 11 pixels");
  const double L = shared_peak(x, x_hat);
  const double c1 = (0.01 * L) * (0.01 * L), c2 = (0.03 * L) * (0.03 * L);
  const auto w = gaussian_window();
  std::vector<double> per_band(C);
  parallel_for(C, [&](std::size_t k) {
    std::vector<double> a(H * W), b(H * W), aa(H * W), bb(H * W), ab(H * W);
    for (std::size_t i = 0; i < H * W; ++i) {
      a[i] = x.values().data()[i * C + k];
      b[i] = x_hat.values().data()[i * C + k];
      aa[i] = a[i] * a[i];
      bb[i] = b[i] * b[i];
      ab[i] = a[i] * b[i];
    }
    const auto ma = window_mean(a, H, W, w), mb = window_mean(b, H, W, w);
    const auto maa = window_mean(aa, H, W, w), mbb = window_mean(bb, H, W, w), mab = window_mean(ab, H, W, w);
    double s = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) {
      const double va = maa[i] - ma[i] * ma[i], vb = mbb[i] - mb[i] * mb[i], cov = mab[i] - ma[i] * mb[i];
      s += ((2 * ma[i] * mb[i] + c1) * (2 * cov + c2)) / ((ma[i] * ma[i] + mb[i] * mb[i] + c1) * (va + vb + c2));
    }
    per_band[k] = s / static_cast<double>(ma.size());
  });
  double total = 0.0;
  for (double v : per_band) total += v;
  return total / static_cast<double>(C);
}

MetricReport full_metrics(const HsiCube& x, const HsiCube& x_hat) {
  MetricReport r;
  r.psnr = psnr(x, x_hat);
  const SamResult s = sam(x, x_hat);
  r.sam = s.mean;
  r.sam_excluded = s.excluded;
  if (x.height() >= kWindow && x.width() >= kWindow) r.ssim = ssim_mean(x, x_hat);
  return r;
}

MetricReport masked_metrics(const HsiCube& x, const HsiCube& x_hat, const Array3& unc, double keep) {
  check_pair(x, x_hat);
  require(keep > 0.0 && keep <= 1.0, "keep fraction must lie in (0, 1]");
  require(unc.rows() == x.height() && unc.cols() == x.width() && unc.channels() == 1,
          "uncertainty map does not match the cube");
  std::vector<std::size_t> order = all_pixels(x);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return unc.data()[a] < unc.data()[b]; });
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(keep * static_cast<double>(order.size()))));
  order.resize(std::min(n, order.size()));
  std::sort(order.begin(), order.end());
  MetricReport r;
  r.kept_fraction = static_cast<double>(order.size()) / static_cast<double>(x.height() * x.width());
  r.psnr = psnr_over(x, x_hat, order, shared_peak(x, x_hat));
  const SamResult s = sam_over(x, x_hat, order);
  r.sam = s.mean;
  r.sam_excluded = s.excluded;
  return r;
}

Array3 squared_error_map(const HsiCube& x, const HsiCube& x_hat) {
  check_pair(x, x_hat);
  Array3 m(x.height(), x.width(), 1);
  for (std::size_t r = 0; r < x.height(); ++r)
    for (std::size_t c = 0; c < x.width(); ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.bands(); ++k) s += (x(r, c, k) - x_hat(r, c, k)) * (x(r, c, k) - x_hat(r, c, k));
      m(r, c, 0) = s;
    }
  return m;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "Pearson inputs differ in length");
  require(a.size() >= 2, "Pearson needs at least two points");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw NumericError("Pearson correlation undefined for constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double uncertainty_error_correlation(const Array3& unc, const HsiCube& x, const HsiCube& x_hat, std::size_t max_points,
                                     std::uint64_t seed) {
  const Array3 err = squared_error_map(x, x_hat);
  require(unc.same_shape(err), "uncertainty map does not match the cube");
  std::vector<std::size_t> idx(err.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (idx.size() > max_points) {
    auto rng = keyed_engine({seed, 0x70656172ULL});
    // Partial Fisher-Yates: the first max_points entries become the sample.
    for (std::size_t i = 0; i < max_points; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(max_points);
  }
  std::vector<double> u, e;
  for (std::size_t i : idx) {
    u.push_back(unc.data()[i]);
    e.push_back(err.data()[i]);
  }
  return pearson(u, e);
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<std::pair<std::string, double>>& rows,
                       const std::string& hash) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out.precision(10);
  out << "metric,value,config_hash\n";
  for (const auto& [name, value] : rows) out << name << ',' << value << ',' << hash << '\n';
  if (!out) throw ConfigError("write failed: " + path.string());
}

void write_metrics_csv(const std::filesystem::path& path, const MetricReport& r, const std::string& hash) {
  std::vector<std::pair<std::string, double>> rows{{"psnr", r.psnr}, {"sam", r.sam}};
  if (r.ssim) rows.push_back({"ssim", *r.ssim});
  rows.push_back({"sam_excluded", static_cast<double>(r.sam_excluded)});
  rows.push_back({"kept_fraction", r.kept_fraction});
  if (r.pearson) rows.push_back({"pearson", *r.pearson});
  write_metrics_csv(path, rows, hash);
}

}  // namespace specdiff
