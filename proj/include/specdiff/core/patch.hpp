#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "specdiff/core/array3.hpp"

namespace specdiff {

/// Axis-aligned pixel rectangle. Rows [row, row + height), cols [col, col + width).
struct Rect {
  std::ptrdiff_t row = 0;
  std::ptrdiff_t col = 0;
  std::ptrdiff_t height = 0;
  std::ptrdiff_t width = 0;

  bool empty() const { return height <= 0 || width <= 0; }
  std::ptrdiff_t row_end() const { return row + height; }
  std::ptrdiff_t col_end() const { return col + width; }
  Rect intersect(const Rect& other) const;
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Tiling of an H x W image into P x P patches placed every `stride` pixels.
///
/// The image is zero-padded on the bottom/right up to a multiple of the
/// stride (and at least P). With stride < P, patches overlap and each pixel
/// is owned by exactly one patch: the one whose central stride x stride
/// crop contains it (the first/last patch per axis also own the margin).
class PatchLayout {
 public:
  PatchLayout(std::size_t height, std::size_t width, std::size_t patch_size, std::size_t stride);
  /// Non-overlapping tiling (stride = patch size).
  PatchLayout(std::size_t height, std::size_t width, std::size_t patch_size)
      : PatchLayout(height, width, patch_size, patch_size) {}

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t patch_size() const { return patch_; }
  std::size_t stride() const { return stride_; }
  std::size_t padded_height() const { return padded_h_; }
  std::size_t padded_width() const { return padded_w_; }
  std::size_t patches_down() const { return n_down_; }
  std::size_t patches_across() const { return n_across_; }
  std::size_t count() const { return n_down_ * n_across_; }
  bool overlapping() const { return stride_ < patch_; }

  /// Top-left corner of patch i (row-major patch order), padded coordinates.
  std::pair<std::size_t, std::size_t> origin(std::size_t i) const;
  /// Region of the padded image owned by patch i.
  Rect owned(std::size_t i) const;
  /// Owned region restricted to the real (unpadded) image; never empty.
  Rect owned_in_image(std::size_t i) const;

  friend bool operator==(const PatchLayout&, const PatchLayout&) = default;

 private:
  std::pair<std::size_t, std::size_t> owned_span(std::size_t index, std::size_t count,
                                                 std::size_t padded) const;

  std::size_t height_, width_, patch_, stride_;
  std::size_t padded_h_, padded_w_, n_down_, n_across_;
};

/// Patches of one image (or estimate) plus per-patch scale factors.
struct PatchSet {
  PatchLayout layout;
  std::vector<Array3> patches;
  std::vector<double> scales;

  PatchSet(PatchLayout layout_, std::vector<Array3> patches_);
  PatchSet(PatchLayout layout_, std::vector<Array3> patches_, std::vector<double> scales_);

  std::size_t size() const { return patches.size(); }
  std::size_t channels() const;
};

/// Bit-exact crops of `image` (H x W x any channels) according to `layout`.
PatchSet patch(const Array3& image, const PatchLayout& layout);

/// Reassemble an H x W image from owned regions, each multiplied by its scale.
Array3 stitch(const PatchSet& patches);

/// Per-pixel count of contributing patches; all ones for a valid layout.
std::vector<std::size_t> source_count(const PatchLayout& layout);

/// What to do with an all-zero patch during max-normalization.
enum class ZeroPatchPolicy { kThrow, kPassThrough };

/// Divide by the patch max, then map [0, 1] -> [-1, 1]. An all-zero patch
/// either throws or is treated as zeros in [0, 1] (all -1 after mapping).
Array3 normalize_patch(const Array3& patch, ZeroPatchPolicy policy);

/// Max-normalize a training pair (x patch, y patch) to [-1, 1].
std::pair<Array3, Array3> normalize_pair(const Array3& x_patch, const Array3& y_patch,
                                         ZeroPatchPolicy policy = ZeroPatchPolicy::kThrow);

}  // namespace specdiff
