#pragma once

#include <filesystem>

#include "specdiff/core/cube.hpp"

namespace specdiff {

/// "HSI1", u32 H, W, C, C f32 wavelengths (nm), H*W*C f32 values in (row, col, band) order.
void write_hsi(const std::filesystem::path& path, const HsiCube& cube);
HsiCube read_hsi(const std::filesystem::path& path);

/// "MSR1", u32 H, W, S, H*W*S f32 values.
void write_measurement(const std::filesystem::path& path, const Measurement& y);
Measurement read_measurement(const std::filesystem::path& path);

}  // namespace specdiff
