#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <new>

#include <fftw3.h>

namespace specdiff::fft {

using Complex = std::complex<double>;

/// Smallest even n' >= n whose only prime factors are 2, 3, 5, 7.
std::size_t good_size(std::size_t n);

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

/// SIMD-aligned buffer. Plans are created on aligned storage and executed on
/// other aligned buffers, so every buffer passed to Plan2d must come from here.
template <typename T>
class Buffer {
 public:
  Buffer() = default;
  explicit Buffer(std::size_t n) : size_(n), data_(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (!data_ && n > 0) throw std::bad_alloc();
    std::fill(data_.get(), data_.get() + n, T{});
  }
  T* data() { return data_.get(); }
  const T* data() const { return data_.get(); }
  std::size_t size() const { return size_; }
  T& operator[](std::size_t i) { return data_.get()[i]; }
  const T& operator[](std::size_t i) const { return data_.get()[i]; }
  void zero() { std::fill(data_.get(), data_.get() + size_, T{}); }

 private:
  std::size_t size_ = 0;
  std::unique_ptr<T, FftwDeleter> data_;
};

using RealBuffer = Buffer<double>;
using ComplexBuffer = Buffer<Complex>;

/// Cached 2D FFTW plans for one n0 x n1 shape (FFTW_ESTIMATE, so results are
/// reproducible run to run). Execution is thread-safe; creation goes through
/// a global mutex.
class Plan2d {
 public:
  static const Plan2d& get(std::size_t n0, std::size_t n1);

  std::size_t n0() const { return n0_; }
  std::size_t n1() const { return n1_; }
  /// Number of complex bins of the half spectrum, n0 * (n1 / 2 + 1).
  std::size_t half_size() const { return n0_ * (n1_ / 2 + 1); }
  std::size_t real_size() const { return n0_ * n1_; }

  void forward(double* in, Complex* out) const;         // r2c, in is not preserved
  void inverse(Complex* in, double* out) const;         // c2r unnormalized, in is destroyed
  void forward_complex(Complex* in, Complex* out) const;  // full c2c

  Plan2d(std::size_t n0, std::size_t n1);
  ~Plan2d();
  Plan2d(const Plan2d&) = delete;
  Plan2d& operator=(const Plan2d&) = delete;

 private:
  std::size_t n0_, n1_;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
  mutable fftw_plan c2c_ = nullptr;
};

}  // namespace specdiff::fft
