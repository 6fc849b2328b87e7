#include "specdiff/guidance/gram.hpp"

#include <algorithm>
#include <cmath>

#include "specdiff/core/error.hpp"
#include "specdiff/core/parallel.hpp"

namespace specdiff {

double overlap_dot(const Rect& fa, const Array3& a, const Rect& fb, const Array3& b) {
  const Rect o = fa.intersect(fb);
  if (o.empty()) return 0.0;
  const std::size_t K = a.channels();
  double s = 0.0;
  for (auto r = o.row; r < o.row_end(); ++r) {
    const double* pa = a.pixel(static_cast<std::size_t>(r - fa.row), static_cast<std::size_t>(o.col - fa.col)).data();
    const double* pb = b.pixel(static_cast<std::size_t>(r - fb.row), static_cast<std::size_t>(o.col - fb.col)).data();
    const std::size_t n = static_cast<std::size_t>(o.width) * K;
    for (std::size_t i = 0; i < n; ++i) s += pa[i] * pb[i];
  }
  return s;
}

GramSystem::GramSystem(const PatchResponses& resp, const Measurement& y) {
  const std::size_t p = resp.size();
  require(resp.footprints.size() == p, "one footprint per patch response");
  const Rect whole{0, 0, static_cast<std::ptrdiff_t>(y.height()), static_cast<std::ptrdiff_t>(y.width())};
  for (std::size_t i = 0; i < p; ++i) {
    require(resp.images[i].channels() == y.channels(), "patch response channels do not match the measurement");
    require(resp.footprints[i].intersect(whole) == resp.footprints[i] || resp.footprints[i].empty(),
            "patch footprint leaves the measurement");
  }
  rows_.assign(p, {});
  b_.assign(p, 0.0);
  parallel_for(p, [&](std::size_t i) {
    for (std::size_t j = 0; j < p; ++j) {
      if (resp.footprints[i].intersect(resp.footprints[j]).empty()) continue;
      rows_[i].emplace_back(j, overlap_dot(resp.footprints[i], resp.images[i], resp.footprints[j], resp.images[j]));
    }
    b_[i] = overlap_dot(resp.footprints[i], resp.images[i], whole, y.values());
  });

  double max_diag = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    if (!std::isfinite(b_[i])) throw NumericError("non-finite Gram right-hand side");
    for (const auto& [j, v] : rows_[i])
      if (!std::isfinite(v)) throw NumericError("non-finite Gram entry");
    max_diag = std::max(max_diag, entry(i, i));
  }
  active_.assign(p, false);
  for (std::size_t i = 0; i < p; ++i) active_[i] = entry(i, i) > 1e-24 * max_diag && entry(i, i) > 0.0;
}

double GramSystem::entry(std::size_t i, std::size_t j) const {
  const auto& r = rows_[i];
  auto it = std::lower_bound(r.begin(), r.end(), j, [](const auto& e, std::size_t k) { return e.first < k; });
  return it != r.end() && it->first == j ? it->second : 0.0;
}

std::size_t GramSystem::nonzeros() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

std::vector<double> GramSystem::solve(double rel_tol) const {
  const std::size_t p = size();
  std::vector<double> c(p, 1.0);
  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (std::size_t i = 0; i < p; ++i) {
      if (!active_[i]) {
        out[i] = 0.0;
        continue;
      }
      double s = 0.0;
      for (const auto& [j, a] : rows_[i])
        if (active_[j]) s += a * v[j];
      out[i] = s;
    }
  };
  double bnorm2 = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    if (active_[i]) bnorm2 += b_[i] * b_[i];
  const double target = rel_tol * rel_tol * bnorm2;

  std::vector<double> r(p, 0.0), z(p, 0.0), d(p, 0.0), q(p, 0.0);
  apply(c, q);
  double rr = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    if (!active_[i]) continue;
    r[i] = b_[i] - q[i];
    rr += r[i] * r[i];
  }
  if (rr <= target) return c;
  double rz = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    if (!active_[i]) continue;
    z[i] = r[i] / entry(i, i);
    d[i] = z[i];
    rz += r[i] * z[i];
  }
  const std::size_t max_iter = 20 * p + 100;
  for (std::size_t it = 0; it < max_iter && rr > target; ++it) {
    apply(d, q);
    double dq = 0.0;
    for (std::size_t i = 0; i < p; ++i) dq += d[i] * q[i];
    if (!(dq > 0.0)) break;
    const double alpha = rz / dq;
    rr = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      if (!active_[i]) continue;
      c[i] += alpha * d[i];
      r[i] -= alpha * q[i];
      rr += r[i] * r[i];
    }
    double rz_new = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      if (!active_[i]) continue;
      z[i] = r[i] / entry(i, i);
      rz_new += r[i] * z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < p; ++i)
      if (active_[i]) d[i] = z[i] + beta * d[i];
  }
  // Recompute the true residual; the recurrence drifts on ill-conditioned systems.
  apply(c, q);
  rr = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    if (active_[i]) rr += (b_[i] - q[i]) * (b_[i] - q[i]);
  if (rr > 1e-12 * bnorm2) throw NumericError("scale solve did not converge");
  for (double v : c)
    if (!std::isfinite(v)) throw NumericError("non-finite patch scale");
  return c;
}

}  // namespace specdiff
