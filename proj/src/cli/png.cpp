#include "specdiff/cli/png.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "specdiff/core/error.hpp"

namespace specdiff {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const std::filesystem::path& path, const Array3& image) {
  require(image.channels() == 1 || image.channels() == 3, "PNG needs 1 or 3 channels");
  require(image.rows() > 0 && image.cols() > 0, "PNG needs a non-empty image");
  File f(std::fopen(path.c_str(), "wb"));
  if (!f) throw ConfigError("cannot open for writing: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw ConfigError("libpng initialization failed");
  }
  const std::size_t H = image.rows(), W = image.cols(), K = image.channels();
  std::vector<png_byte> bytes(H * W * K);
  for (std::size_t i = 0; i < bytes.size(); ++i)
    bytes[i] = static_cast<png_byte>(std::lround(255.0 * std::clamp(image.data()[i], 0.0, 1.0)));
  std::vector<png_bytep> rows(H);
  for (std::size_t r = 0; r < H; ++r) rows[r] = bytes.data() + r * W * K;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ConfigError("PNG write failed: " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(W), static_cast<png_uint_32>(H), 8,
               K == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Array3 read_png(const std::filesystem::path& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) throw ConfigError("cannot open: " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ConfigError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ConfigError("not a readable PNG: " + path.string());
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  png_read_update_info(png, info);
  const std::size_t H = png_get_image_height(png, info), W = png_get_image_width(png, info);
  const std::size_t K = png_get_channels(png, info);
  std::vector<png_byte> bytes(H * W * K);
  std::vector<png_bytep> rows(H);
  for (std::size_t r = 0; r < H; ++r) rows[r] = bytes.data() + r * W * K;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  Array3 out(H, W, K);
  for (std::size_t i = 0; i < bytes.size(); ++i) out.data()[i] = bytes[i] / 255.0;
  return out;
}

Array3 max_normalized(const Array3& image) {
  Array3 out = image;
  const double m = image.empty() ? 0.0 : image.max();
  if (m > 0.0)
    for (double& v : out.flat()) v /= m;
  return out;
}

}  // namespace specdiff
