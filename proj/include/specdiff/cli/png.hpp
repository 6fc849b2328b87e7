#pragma once

#include <filesystem>

#include "specdiff/core/array3.hpp"

namespace specdiff {

/// 8-bit PNG from values in [0, 1] (clamped). 1 channel = gray, 3 = RGB.
void write_png(const std::filesystem::path& path, const Array3& image);
/// Values back in [0, 1]; gray images load with one channel.
Array3 read_png(const std::filesystem::path& path);

/// Divide by the maximum (all-zero stays zero).
Array3 max_normalized(const Array3& image);

}  // namespace specdiff
