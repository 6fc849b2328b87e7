#include "specdiff/core/fft.hpp"

#include <map>
#include <mutex>
#include <utility>

#include "specdiff/core/error.hpp"

namespace specdiff::fft {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool smooth(std::size_t n) {
  for (std::size_t p : {2u, 3u, 5u, 7u})
    while (n % p == 0) n /= p;
  return n == 1;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

std::size_t good_size(std::size_t n) {
  std::size_t m = std::max<std::size_t>(n, 2);
  if (m % 2) ++m;
  while (!smooth(m)) m += 2;
  return m;
}

Plan2d::Plan2d(std::size_t n0, std::size_t n1) : n0_(n0), n1_(n1) {
  require(n0 > 0 && n1 > 0, "FFT shape must be non-empty");
  RealBuffer real(real_size());
  ComplexBuffer spec(half_size());
  const int a = static_cast<int>(n0), b = static_cast<int>(n1);
  r2c_ = fftw_plan_dft_r2c_2d(a, b, real.data(), as_fftw(spec.data()), FFTW_ESTIMATE);
  c2r_ = fftw_plan_dft_c2r_2d(a, b, as_fftw(spec.data()), real.data(), FFTW_ESTIMATE);
  if (!r2c_ || !c2r_) throw NumericError("FFTW plan creation failed");
}

Plan2d::~Plan2d() {
  if (r2c_) fftw_destroy_plan(r2c_);
  if (c2r_) fftw_destroy_plan(c2r_);
  if (c2c_) fftw_destroy_plan(c2c_);
}

const Plan2d& Plan2d::get(std::size_t n0, std::size_t n1) {
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Plan2d>> cache;
  std::lock_guard lock(planner_mutex());
  auto& slot = cache[{n0, n1}];
  if (!slot) slot = std::make_unique<Plan2d>(n0, n1);
  return *slot;
}

void Plan2d::forward(double* in, Complex* out) const { fftw_execute_dft_r2c(r2c_, in, as_fftw(out)); }

void Plan2d::inverse(Complex* in, double* out) const { fftw_execute_dft_c2r(c2r_, as_fftw(in), out); }

void Plan2d::forward_complex(Complex* in, Complex* out) const {
  {
    std::lock_guard lock(planner_mutex());
    if (!c2c_) {
      ComplexBuffer a(real_size()), b(real_size());
      c2c_ = fftw_plan_dft_2d(static_cast<int>(n0_), static_cast<int>(n1_), as_fftw(a.data()), as_fftw(b.data()),
                              FFTW_FORWARD, FFTW_ESTIMATE);
      if (!c2c_) throw NumericError("FFTW plan creation failed");
    }
  }
  fftw_execute_dft(c2c_, as_fftw(in), as_fftw(out));
}

}  // namespace specdiff::fft
