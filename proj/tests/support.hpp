#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <algorithm>
#include <cmath>
#include <string>

#include "specdiff/core/array3.hpp"

namespace testing_support {

inline specdiff::Array3 random_array(std::size_t r, std::size_t c, std::size_t k, std::mt19937_64& rng,
                                     double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  specdiff::Array3 a(r, c, k);
  for (double& v : a.flat()) v = u(rng);
  return a;
}

inline double max_abs_diff(const specdiff::Array3& a, const specdiff::Array3& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline double max_abs(const specdiff::Array3& a) {
  double m = 0.0;
  for (double v : a.flat()) m = std::max(m, std::abs(v));
  return m;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("specdiff_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support

namespace testing_support {

/// Largest per-element relative error, with a floor tied to the gradient
/// scale so entries that are zero up to round-off do not dominate.
inline double max_relative_error(std::span<const double> got, std::span<const double> want) {
  double scale = 0.0;
  for (double w : want) scale = std::max(scale, std::abs(w));
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double den = std::max({std::abs(got[i]), std::abs(want[i]), 1e-4 * scale, 1e-300});
    worst = std::max(worst, std::abs(got[i] - want[i]) / den);
  }
  return worst;
}

}  // namespace testing_support
