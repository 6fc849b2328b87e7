#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace specdiff {

/// Dense rows x cols x channels array stored in (row, col, channel) order.
class Array3 {
 public:
  Array3() = default;
  Array3(std::size_t rows, std::size_t cols, std::size_t channels, double fill = 0.0)
      : rows_(rows), cols_(cols), channels_(channels), data_(rows * cols * channels, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c, std::size_t k) {
    return data_[(r * cols_ + c) * channels_ + k];
  }
  double operator()(std::size_t r, std::size_t c, std::size_t k) const {
    return data_[(r * cols_ + c) * channels_ + k];
  }

  /// Spectrum (all channels) at one pixel.
  std::span<double> pixel(std::size_t r, std::size_t c) {
    return {data_.data() + (r * cols_ + c) * channels_, channels_};
  }
  std::span<const double> pixel(std::size_t r, std::size_t c) const {
    return {data_.data() + (r * cols_ + c) * channels_, channels_};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Array3& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && channels_ == other.channels_;
  }

  /// Single channel copied out as a rows x cols x 1 array.
  Array3 channel(std::size_t k) const;

  double max() const;
  double sum() const;
  bool all_finite() const;

  Array3& operator+=(const Array3& other);
  Array3& operator-=(const Array3& other);
  Array3& operator*=(double s);

  friend bool operator==(const Array3&, const Array3&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

Array3 operator+(Array3 a, const Array3& b);
Array3 operator-(Array3 a, const Array3& b);
Array3 operator*(double s, Array3 a);

/// Euclidean inner product over all elements, accumulated in order.
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

}  // namespace specdiff
