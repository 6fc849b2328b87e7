#pragma once

#include "specdiff/core/cube.hpp"
#include "specdiff/optics/psf.hpp"
#include "specdiff/render/sensor.hpp"

namespace specdiff::reference {

// Serial direct-summation kernels. They define the semantics the FFT and
// OpenMP paths must reproduce and are kept for tests and benchmarks.

Measurement render_direct(const HsiCube& x, const SpectralPsf& psf, const SensorResponse& sensor);
HsiCube render_adjoint_direct(const Measurement& y, const SpectralPsf& psf, const SensorResponse& sensor);

}  // namespace specdiff::reference
