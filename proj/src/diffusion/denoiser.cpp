#include "specdiff/diffusion/denoiser.hpp"

#include "specdiff/core/error.hpp"

namespace specdiff {

Array3 Denoiser::vjp(const Array3&, std::size_t, const Array3&, const Array3&) const {
  throw ConfigError("this denoiser has no vector-Jacobian product; use the frozen gradient mode");
}

}  // namespace specdiff
