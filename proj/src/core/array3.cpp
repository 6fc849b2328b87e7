#include "specdiff/core/array3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specdiff/core/error.hpp"

namespace specdiff {

Array3 Array3::channel(std::size_t k) const {
  require(k < channels_, "channel index out of range");
  Array3 out(rows_, cols_, 1);
  for (std::size_t i = 0; i < rows_ * cols_; ++i) out.data_[i] = data_[i * channels_ + k];
  return out;
}

double Array3::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::max(m, v);
  return m;
}

double Array3::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

bool Array3::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Array3& Array3::operator+=(const Array3& other) {
  require(same_shape(other), "Array3 shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Array3& Array3::operator-=(const Array3& other) {
  require(same_shape(other), "Array3 shape mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Array3& Array3::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Array3 operator+(Array3 a, const Array3& b) { return a += b; }
Array3 operator-(Array3 a, const Array3& b) { return a -= b; }
Array3 operator*(double s, Array3 a) { return a *= s; }

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

}  // namespace specdiff
