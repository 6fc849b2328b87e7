#include "specdiff/core/patch.hpp"

#include <algorithm>

#include "specdiff/core/error.hpp"

namespace specdiff {

Rect Rect::intersect(const Rect& o) const {
  const auto r0 = std::max(row, o.row);
  const auto c0 = std::max(col, o.col);
  const auto r1 = std::min(row_end(), o.row_end());
  const auto c1 = std::min(col_end(), o.col_end());
  return {r0, c0, std::max<std::ptrdiff_t>(0, r1 - r0), std::max<std::ptrdiff_t>(0, c1 - c0)};
}

namespace {

std::size_t padded_extent(std::size_t n, std::size_t patch, std::size_t stride) {
  const std::size_t m = std::max(n, patch);
  return (m + stride - 1) / stride * stride;
}

}  // namespace

PatchLayout::PatchLayout(std::size_t height, std::size_t width, std::size_t patch_size, std::size_t stride)
    : height_(height), width_(width), patch_(patch_size), stride_(stride) {
  require(height > 0 && width > 0, "layout needs a non-empty image");
  require(patch_size > 0 && stride > 0, "patch size and stride must be positive");
  require(stride <= patch_size, "stride cannot exceed the patch size");
  require(patch_size % stride == 0, "patch size must be a multiple of the stride");
  padded_h_ = padded_extent(height, patch_size, stride);
  padded_w_ = padded_extent(width, patch_size, stride);
  n_down_ = (padded_h_ - patch_) / stride_ + 1;
  n_across_ = (padded_w_ - patch_) / stride_ + 1;
}

std::pair<std::size_t, std::size_t> PatchLayout::origin(std::size_t i) const {
  require(i < count(), "patch index out of range");
  return {(i / n_across_) * stride_, (i % n_across_) * stride_};
}

std::pair<std::size_t, std::size_t> PatchLayout::owned_span(std::size_t index, std::size_t n,
                                                            std::size_t padded) const {
  const std::size_t margin = (patch_ - stride_) / 2;
  const std::size_t start = index == 0 ? 0 : index * stride_ + margin;
  const std::size_t end = index + 1 == n ? padded : (index + 1) * stride_ + margin;
  return {start, end};
}

Rect PatchLayout::owned(std::size_t i) const {
  require(i < count(), "patch index out of range");
  const auto [r0, r1] = owned_span(i / n_across_, n_down_, padded_h_);
  const auto [c0, c1] = owned_span(i % n_across_, n_across_, padded_w_);
  return {static_cast<std::ptrdiff_t>(r0), static_cast<std::ptrdiff_t>(c0),
          static_cast<std::ptrdiff_t>(r1 - r0), static_cast<std::ptrdiff_t>(c1 - c0)};
}

Rect PatchLayout::owned_in_image(std::size_t i) const {
  return owned(i).intersect(
      {0, 0, static_cast<std::ptrdiff_t>(height_), static_cast<std::ptrdiff_t>(width_)});
}

PatchSet::PatchSet(PatchLayout layout_, std::vector<Array3> patches_)
    : PatchSet(layout_, std::move(patches_), std::vector<double>(layout_.count(), 1.0)) {}

PatchSet::PatchSet(PatchLayout layout_, std::vector<Array3> patches_, std::vector<double> scales_)
    : layout(layout_), patches(std::move(patches_)), scales(std::move(scales_)) {
  require(scales.size() == patches.size(), "one scale per patch");
}

std::size_t PatchSet::channels() const { return patches.empty() ? 0 : patches.front().channels(); }

PatchSet patch(const Array3& image, const PatchLayout& layout) {
  require(image.rows() == layout.height() && image.cols() == layout.width(),
          "image dimensions do not match the patch layout");
  const std::size_t P = layout.patch_size();
  const std::size_t K = image.channels();
  std::vector<Array3> out;
  out.reserve(layout.count());
  for (std::size_t i = 0; i < layout.count(); ++i) {
    const auto [r0, c0] = layout.origin(i);
    Array3 p(P, P, K);
    for (std::size_t r = 0; r < P; ++r) {
      const std::size_t gr = r0 + r;
      if (gr >= image.rows()) break;
      for (std::size_t c = 0; c < P; ++c) {
        const std::size_t gc = c0 + c;
        if (gc >= image.cols()) break;
        std::copy_n(image.pixel(gr, gc).data(), K, p.pixel(r, c).data());
      }
    }
    out.push_back(std::move(p));
  }
  return PatchSet(layout, std::move(out));
}

Array3 stitch(const PatchSet& set) {
  const PatchLayout& layout = set.layout;
  if (set.patches.size() != layout.count()) throw ConfigError("stitch: missing patches");
  const std::size_t P = layout.patch_size();
  const std::size_t K = set.channels();
  for (const Array3& p : set.patches) {
    if (p.rows() != P || p.cols() != P || p.channels() != K) throw ConfigError("stitch: missing or malformed patch");
  }
  Array3 out(layout.height(), layout.width(), K);
  for (std::size_t i = 0; i < layout.count(); ++i) {
    const Rect own = layout.owned_in_image(i);
    const auto [r0, c0] = layout.origin(i);
    const double s = set.scales[i];
    for (auto r = own.row; r < own.row_end(); ++r) {
      for (auto c = own.col; c < own.col_end(); ++c) {
        auto src = set.patches[i].pixel(r - r0, c - c0);
        auto dst = out.pixel(r, c);
        for (std::size_t k = 0; k < K; ++k) dst[k] = s * src[k];
      }
    }
  }
  return out;
}

std::vector<std::size_t> source_count(const PatchLayout& layout) {
  std::vector<std::size_t> count(layout.height() * layout.width(), 0);
  for (std::size_t i = 0; i < layout.count(); ++i) {
    const Rect own = layout.owned_in_image(i);
    for (auto r = own.row; r < own.row_end(); ++r)
      for (auto c = own.col; c < own.col_end(); ++c) ++count[r * layout.width() + c];
  }
  return count;
}

Array3 normalize_patch(const Array3& p, ZeroPatchPolicy policy) {
  Array3 out = p;
  const double m = p.empty() ? 0.0 : p.max();
  if (!(m > 0.0)) {
    if (policy == ZeroPatchPolicy::kThrow) throw ConfigError("cannot max-normalize an all-zero patch");
    for (double& v : out.flat()) v = -1.0;
    return out;
  }
  for (double& v : out.flat()) v = 2.0 * (v / m) - 1.0;
  return out;
}

std::pair<Array3, Array3> normalize_pair(const Array3& x_patch, const Array3& y_patch, ZeroPatchPolicy policy) {
  return {normalize_patch(x_patch, policy), normalize_patch(y_patch, policy)};
}

}  // namespace specdiff
