#include "specdiff/render/cassi.hpp"

#include <algorithm>

#include "specdiff/core/binary_io.hpp"
#include "specdiff/core/error.hpp"
#include "specdiff/core/rng.hpp"

namespace specdiff {

std::size_t CassiSpec::max_shear() const {
  return shears.empty() ? 0 : static_cast<std::size_t>(*std::max_element(shears.begin(), shears.end()));
}

void CassiSpec::validate() const {
  require(height > 0 && width > 0, "CASSI scene must be non-empty");
  require(mask.size() == height * width, "CASSI mask size does not match the scene");
  require(!shears.empty(), "CASSI needs at least one band");
  for (auto m : mask) require(m <= 1, "CASSI mask must be binary");
  for (std::size_t c = 0; c < shears.size(); ++c) {
    require(shears[c] >= 0, "CASSI shears must be >= 0");
    if (c > 0) require(shears[c] >= shears[c - 1], "CASSI shears must be non-decreasing");
  }
}

CassiSpec default_cassi(std::size_t height, std::size_t width, std::size_t bands, int step,
                        std::uint64_t seed) {
  require(step >= 0, "shear step must be >= 0");
  CassiSpec spec;
  spec.height = height;
  spec.width = width;
  spec.mask.resize(height * width);
  auto engine = keyed_engine({seed, 0xca551ULL});
  std::bernoulli_distribution coin(0.5);
  for (auto& m : spec.mask) m = coin(engine) ? 1 : 0;
  for (std::size_t c = 0; c < bands; ++c) spec.shears.push_back(step * static_cast<int>(c));
  spec.validate();
  return spec;
}

Measurement render_cassi(const HsiCube& x, const CassiSpec& spec) {
  return CassiOperator(spec, x.grid()).apply(x);
}

Array3 deshear(const Measurement& y, const CassiSpec& spec) {
  spec.validate();
  require(y.height() == spec.height && y.width() == spec.measurement_width() && y.channels() == 1,
          "measurement does not match the CASSI geometry");
  Array3 out(spec.height, spec.width, spec.bands());
  for (std::size_t u = 0; u < spec.height; ++u)
    for (std::size_t w = 0; w < spec.width; ++w)
      for (std::size_t c = 0; c < spec.bands(); ++c)
        out(u, w, c) = y.values()(u, w + static_cast<std::size_t>(spec.shears[c]), 0);
  return out;
}

CassiOperator::CassiOperator(CassiSpec spec, SpectralGrid grid) : spec_(std::move(spec)), grid_(std::move(grid)) {
  spec_.validate();
  require(grid_.size() == spec_.bands(), "CASSI band count does not match the spectral grid");
}

Rect CassiOperator::footprint(const Rect& region) const {
  const Rect reach{region.row, region.col, region.height,
                   region.width + static_cast<std::ptrdiff_t>(spec_.max_shear())};
  return reach.intersect({0, 0, static_cast<std::ptrdiff_t>(measurement_height()),
                          static_cast<std::ptrdiff_t>(measurement_width())});
}

void CassiOperator::apply_region(const Array3& values, const Rect& region, Array3& out) const {
  const std::size_t C = spec_.bands();
  require(values.rows() == static_cast<std::size_t>(region.height) &&
              values.cols() == static_cast<std::size_t>(region.width) && values.channels() == C,
          "region values do not match the region");
  const Rect foot = footprint(region);
  out = Array3(static_cast<std::size_t>(foot.height), static_cast<std::size_t>(foot.width), 1);
  for (std::ptrdiff_t r = 0; r < region.height; ++r) {
    const std::ptrdiff_t u = region.row + r;
    if (u < 0 || u >= static_cast<std::ptrdiff_t>(spec_.height)) continue;
    for (std::ptrdiff_t c = 0; c < region.width; ++c) {
      const std::ptrdiff_t w = region.col + c;
      if (w < 0 || w >= static_cast<std::ptrdiff_t>(spec_.width)) continue;
      if (!spec_.mask[static_cast<std::size_t>(u) * spec_.width + static_cast<std::size_t>(w)]) continue;
      for (std::size_t b = 0; b < C; ++b) {
        const std::ptrdiff_t v = w + spec_.shears[b];
        out(static_cast<std::size_t>(u - foot.row), static_cast<std::size_t>(v - foot.col), 0) +=
            values(static_cast<std::size_t>(r), static_cast<std::size_t>(c), b);
      }
    }
  }
}

void CassiOperator::adjoint_region(const Array3& residual, const Rect& region, Array3& grad) const {
  const std::size_t C = spec_.bands();
  const Rect foot = footprint(region);
  require(residual.rows() == static_cast<std::size_t>(foot.height) &&
              residual.cols() == static_cast<std::size_t>(foot.width) && residual.channels() == 1,
          "residual does not match the region footprint");
  grad = Array3(static_cast<std::size_t>(region.height), static_cast<std::size_t>(region.width), C);
  for (std::ptrdiff_t r = 0; r < region.height; ++r) {
    const std::ptrdiff_t u = region.row + r;
    if (u < 0 || u >= static_cast<std::ptrdiff_t>(spec_.height)) continue;
    for (std::ptrdiff_t c = 0; c < region.width; ++c) {
      const std::ptrdiff_t w = region.col + c;
      if (w < 0 || w >= static_cast<std::ptrdiff_t>(spec_.width)) continue;
      if (!spec_.mask[static_cast<std::size_t>(u) * spec_.width + static_cast<std::size_t>(w)]) continue;
      for (std::size_t b = 0; b < C; ++b) {
        const std::ptrdiff_t v = w + spec_.shears[b];
        grad(static_cast<std::size_t>(r), static_cast<std::size_t>(c), b) =
            residual(static_cast<std::size_t>(u - foot.row), static_cast<std::size_t>(v - foot.col), 0);
      }
    }
  }
}

Measurement CassiOperator::apply(const HsiCube& x) const {
  require(x.height() == spec_.height && x.width() == spec_.width && x.bands() == spec_.bands(),
          "scene does not match the CASSI geometry");
  Array3 out;
  apply_region(x.values(), {0, 0, static_cast<std::ptrdiff_t>(spec_.height), static_cast<std::ptrdiff_t>(spec_.width)},
               out);
  return Measurement(std::move(out));
}

HsiCube CassiOperator::adjoint(const Measurement& y) const {
  require(y.height() == spec_.height && y.width() == spec_.measurement_width() && y.channels() == 1,
          "measurement does not match the CASSI geometry");
  Array3 grad;
  adjoint_region(y.values(),
                 {0, 0, static_cast<std::ptrdiff_t>(spec_.height), static_cast<std::ptrdiff_t>(spec_.width)}, grad);
  return HsiCube(grid_, std::move(grad));
}

void write_cassi(const std::filesystem::path& path, const CassiSpec& spec) {
  spec.validate();
  binio::Writer w(path);
  w.magic("CAS1");
  w.u32(static_cast<std::uint32_t>(spec.height));
  w.u32(static_cast<std::uint32_t>(spec.width));
  w.u32(static_cast<std::uint32_t>(spec.bands()));
  for (int d : spec.shears) w.i32(d);
  for (auto m : spec.mask) w.u8(m);
  w.close();
}

CassiSpec read_cassi(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic("CAS1");
  CassiSpec spec;
  spec.height = r.u32();
  spec.width = r.u32();
  const std::uint32_t C = r.u32();
  require(spec.height > 0 && spec.width > 0 && spec.height * spec.width <= (1u << 28) && C > 0 && C <= 4096,
          "implausible CASSI header");
  for (std::uint32_t c = 0; c < C; ++c) spec.shears.push_back(r.i32());
  spec.mask.resize(spec.height * spec.width);
  for (auto& m : spec.mask) m = r.u8();
  r.expect_end();
  spec.validate();
  return spec;
}

}  // namespace specdiff
