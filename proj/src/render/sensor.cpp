#include "specdiff/render/sensor.hpp"

#include <cmath>

#include "specdiff/core/binary_io.hpp"
#include "specdiff/core/error.hpp"

namespace specdiff {

SensorResponse::SensorResponse(SpectralGrid grid, std::size_t channels, std::vector<double> weights)
    : grid_(std::move(grid)), channels_(channels), weights_(std::move(weights)) {
  require(!grid_.empty(), "sensor response needs a spectral grid");
  require(channels_ >= 1 && channels_ <= 3, "sensor has 1 to 3 channels");
  require(weights_.size() == channels_ * grid_.size(), "sensor weight count mismatch");
  for (std::size_t s = 0; s < channels_; ++s) {
    bool any = false;
    for (std::size_t b = 0; b < grid_.size(); ++b) {
      const double w = weight(s, b);
      require(std::isfinite(w) && w >= 0.0, "sensor weights must be finite and >= 0");
      any = any || w > 0.0;
    }
    require(any, "every sensor channel needs a nonzero weight");
  }
}

SensorResponse SensorResponse::panchromatic(const SpectralGrid& grid) {
  return SensorResponse(grid, 1, std::vector<double>(grid.size(), 1.0));
}

SensorResponse SensorResponse::rgb(const SpectralGrid& grid, double sigma_nm) {
  const double centers[3] = {610.0, 540.0, 470.0};
  std::vector<double> w(3 * grid.size());
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t b = 0; b < grid.size(); ++b) {
      const double z = (grid[b] - centers[s]) / sigma_nm;
      w[s * grid.size() + b] = std::exp(-0.5 * z * z);
    }
  }
  return SensorResponse(grid, 3, std::move(w));
}

void write_sensor(const std::filesystem::path& path, const SensorResponse& sensor) {
  binio::Writer w(path);
  w.magic("SNS1");
  w.u32(static_cast<std::uint32_t>(sensor.channels()));
  w.u32(static_cast<std::uint32_t>(sensor.bands()));
  w.f32s(sensor.grid().wavelengths());
  for (std::size_t s = 0; s < sensor.channels(); ++s)
    for (std::size_t b = 0; b < sensor.bands(); ++b) w.f32(static_cast<float>(sensor.weight(s, b)));
  w.close();
}

SensorResponse read_sensor(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic("SNS1");
  const std::uint32_t S = r.u32();
  const std::uint32_t C = r.u32();
  require(S >= 1 && S <= 3 && C >= 1 && C <= 4096, "implausible sensor header");
  SpectralGrid grid(r.f32s(C));
  auto weights = r.f32s(static_cast<std::size_t>(S) * C);
  r.expect_end();
  return SensorResponse(std::move(grid), S, std::move(weights));
}

}  // namespace specdiff
