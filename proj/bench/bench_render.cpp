// Serial direct-summation reference against the FFT path at several worker
// counts. Arguments: image side, bands, kernel side, workers.
#include <benchmark/benchmark.h>

#include <random>

#include "specdiff/core/parallel.hpp"
#include "specdiff/render/camera.hpp"
#include "specdiff/render/reference.hpp"

using namespace specdiff;

namespace {

struct Scene {
  HsiCube x;
  SpectralPsf psf;
  SensorResponse sensor;
};

Scene make_scene(std::size_t side, std::size_t bands, std::size_t kernel) {
  const auto grid = SpectralGrid::uniform(420, 680, bands);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Array3 cube(side, side, bands), k(kernel, kernel, bands);
  for (double& v : cube.flat()) v = u(rng);
  for (double& v : k.flat()) v = u(rng);
  std::vector<double> w(3 * bands);
  for (double& v : w) v = u(rng);
  return {HsiCube(grid, cube), SpectralPsf(grid, k, 5.0), SensorResponse(grid, 3, w)};
}

void BM_RenderDirect(benchmark::State& state) {
  const auto s = make_scene(state.range(0), state.range(1), state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(reference::render_direct(s.x, s.psf, s.sensor));
}

void BM_RenderFft(benchmark::State& state) {
  const auto s = make_scene(state.range(0), state.range(1), state.range(2));
  set_worker_count(static_cast<std::size_t>(state.range(3)));
  for (auto _ : state) benchmark::DoNotOptimize(render(s.x, s.psf, s.sensor));
}

void BM_AdjointDirect(benchmark::State& state) {
  const auto s = make_scene(state.range(0), state.range(1), state.range(2));
  const Measurement y = render(s.x, s.psf, s.sensor);
  for (auto _ : state) benchmark::DoNotOptimize(reference::render_adjoint_direct(y, s.psf, s.sensor));
}

void BM_AdjointFft(benchmark::State& state) {
  const auto s = make_scene(state.range(0), state.range(1), state.range(2));
  set_worker_count(static_cast<std::size_t>(state.range(3)));
  const PsfCamera cam(s.psf, s.sensor, s.x.height(), s.x.width());
  const Measurement y = cam.apply(s.x);
  for (auto _ : state) benchmark::DoNotOptimize(cam.adjoint(y));
}

}  // namespace

BENCHMARK(BM_RenderDirect)->Args({64, 8, 16})->Args({128, 8, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderFft)->ArgsProduct({{64, 128}, {8}, {16}, {1, 2, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdjointDirect)->Args({64, 8, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdjointFft)->ArgsProduct({{64}, {8}, {16}, {1, 2, 4}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
