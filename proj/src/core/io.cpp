#include "specdiff/core/io.hpp"

#include <cmath>
#include <limits>

#include "specdiff/core/binary_io.hpp"
#include "specdiff/core/error.hpp"

namespace specdiff {

namespace {

constexpr std::uint32_t kMaxDim = 1u << 20;

std::uint32_t checked_dim(std::uint32_t v, const char* what) {
  if (v == 0 || v > kMaxDim) throw ConfigError(std::string("implausible ") + what + " in file header");
  return v;
}

void check_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) throw ConfigError("non-finite value in file");
}

}  // namespace

void write_hsi(const std::filesystem::path& path, const HsiCube& cube) {
  binio::Writer w(path);
  w.magic("HSI1");
  w.u32(static_cast<std::uint32_t>(cube.height()));
  w.u32(static_cast<std::uint32_t>(cube.width()));
  w.u32(static_cast<std::uint32_t>(cube.bands()));
  w.f32s(cube.grid().wavelengths());
  w.f32s(cube.values().flat());
  w.close();
}

HsiCube read_hsi(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic("HSI1");
  const auto H = checked_dim(r.u32(), "height");
  const auto W = checked_dim(r.u32(), "width");
  const auto C = checked_dim(r.u32(), "band count");
  SpectralGrid grid(r.f32s(C));
  HsiCube cube(H, W, std::move(grid));
  auto values = r.f32s(static_cast<std::size_t>(H) * W * C);
  check_finite(values);
  std::copy(values.begin(), values.end(), cube.values().data());
  r.expect_end();
  return cube;
}

void write_measurement(const std::filesystem::path& path, const Measurement& y) {
  binio::Writer w(path);
  w.magic("MSR1");
  w.u32(static_cast<std::uint32_t>(y.height()));
  w.u32(static_cast<std::uint32_t>(y.width()));
  w.u32(static_cast<std::uint32_t>(y.channels()));
  w.f32s(y.values().flat());
  w.close();
}

Measurement read_measurement(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic("MSR1");
  const auto H = checked_dim(r.u32(), "height");
  const auto W = checked_dim(r.u32(), "width");
  const auto S = checked_dim(r.u32(), "channel count");
  Measurement y(H, W, S);
  auto values = r.f32s(static_cast<std::size_t>(H) * W * S);
  check_finite(values);
  std::copy(values.begin(), values.end(), y.values().data());
  r.expect_end();
  return y;
}

}  // namespace specdiff
