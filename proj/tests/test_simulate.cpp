#include <doctest.h>

#include <cmath>

#include "sparsect/metrics.hpp"
#include "sparsect/phantom.hpp"
#include "sparsect/projector.hpp"
#include "sparsect/simulate.hpp"
#include "support.hpp"

using namespace sparsect;

namespace {
VoxelVolume hu_ramp(Shape3 shape, double lo, double hi) {
  VoxelVolume v(shape, {}, Unit::hu);
  const std::size_t n = v.size();
  for (std::size_t k = 0; k < n; ++k)
    v.values()[k] = static_cast<float>(lo + (hi - lo) * k / std::max<std::size_t>(1, n - 1));
  return v;
}
}  // namespace

TEST_CASE("windowing maps the window onto [0, 1]") {
  const WindowSpec w = parse_window("2048x0");
  VoxelVolume v({4, 1, 1}, {}, Unit::hu, std::vector<float>{-1024.0f, 2000.0f, 0.0f, -3000.0f});
  const VoxelVolume n = window_normalize(v, w);
  CHECK(n.unit() == Unit::normalized);
  CHECK(n.at(0, 0) == 0.0f);
  CHECK(n.at(1, 0) == 1.0f);
  CHECK(n.at(2, 0) == 0.5f);
  CHECK(n.at(3, 0) == 0.0f);
  CHECK(clip_to_window(2000.0f, w) == 1024.0f);
  CHECK(clip_to_window(-7.5f, w) == -7.5f);
  CHECK_THROWS_AS(window_normalize(n, w), InvalidInput);
}

TEST_CASE("windowing is monotone and lands on the 2^-24 lattice") {
  const auto ramp = hu_ramp({200, 3, 1}, -1500.0, 1500.0);
  for (const char* spec : {"2048x0", "1700x-600", "400x40"}) {
    const VoxelVolume n = window_normalize(ramp, parse_window(spec));
    const auto vals = n.values();
    for (std::size_t k = 1; k < vals.size(); ++k) CHECK(vals[k] >= vals[k - 1]);
    for (float x : vals) {
      const double scaled = static_cast<double>(x) * 16777216.0;
      CHECK(scaled == std::round(scaled));
    }
  }
}

TEST_CASE("HU and attenuation convert both ways") {
  VoxelVolume v({3, 1, 1}, {}, Unit::hu, std::vector<float>{-1000.0f, 0.0f, 1000.0f});
  const VoxelVolume mu = hu_to_attenuation(v);
  CHECK(mu.unit() == Unit::attenuation);
  CHECK(mu.at(0, 0) == 0.0f);
  CHECK(mu.at(1, 0) == doctest::Approx(kMuWater));
  CHECK(mu.at(2, 0) == doctest::Approx(2 * kMuWater));
  const VoxelVolume back = attenuation_to_hu(mu);
  for (int i = 0; i < 3; ++i) CHECK(back.at(i, 0) == doctest::Approx(v.at(i, 0)).epsilon(1e-5).scale(1000.0));
  CHECK_THROWS_AS(hu_to_attenuation(mu), InvalidInput);
}

TEST_CASE("view subsampling keeps every stride-th view") {
  const auto g = make_clinical_geometry(BeamKind::fan, 5, 1.0);
  Sinogram s(g, scan_angles(g, 64));
  for (std::size_t k = 0; k < s.values.size(); ++k) s.values[k] = static_cast<float>(k);
  const Sinogram sub = subsample_views(s, 16);
  REQUIRE(sub.views() == 16);
  for (int v = 0; v < 16; ++v) {
    CHECK(sub.angles[v] == s.angles[4 * v]);
    for (int d = 0; d < 5; ++d) CHECK(sub.at(v, 0, d) == s.at(4 * v, 0, d));
  }
  CHECK_THROWS_AS(subsample_views(s, 24), InvalidInput);
}

TEST_CASE("correction algebra is exact on windowed data") {
  const WindowSpec w = parse_window("2048x0");
  const auto full = window_normalize(
      testing_support::random_volume({9, 8, 3}, 3, Unit::hu, -1200.0, 1200.0), w);
  const auto sparse = window_normalize(
      testing_support::random_volume({9, 8, 3}, 4, Unit::hu, -1200.0, 1200.0), w);
  const VoxelVolume residual = residual_target(full, sparse);
  const VoxelVolume artifact = artifact_target(full, sparse);
  CHECK(residual.unit() == Unit::difference);
  for (std::size_t k = 0; k < residual.size(); ++k)
    CHECK(residual.values()[k] == -artifact.values()[k]);

  const VoxelVolume corrected = apply_correction(sparse, artifact);
  CHECK(corrected.unit() == Unit::normalized);
  CHECK(corrected.data() == full.data());

  const VoxelVolume zero(sparse.shape(), sparse.spacing(), Unit::difference);
  CHECK(apply_correction(sparse, zero).data() == sparse.data());
}

TEST_CASE("over-correction leaves [0, 1] until clipped") {
  VoxelVolume sparse({2, 1, 1}, {}, Unit::normalized, std::vector<float>{0.1f, 0.9f});
  VoxelVolume pred({2, 1, 1}, {}, Unit::difference, std::vector<float>{0.3f, -0.4f});
  const VoxelVolume c = apply_correction(sparse, pred);
  CHECK(c.unit() == Unit::difference);
  const VoxelVolume clipped = clip_normalized(c);
  CHECK(clipped.unit() == Unit::normalized);
  CHECK(clipped.at(0, 0) == 0.0f);
  CHECK(clipped.at(1, 0) == 1.0f);
}

TEST_CASE("empty phantom gives zero residuals") {
  const VoxelVolume air({24, 24, 2}, {}, Unit::hu, kAirHu);
  SimulationOptions opt;
  opt.full_views = 256;
  for (BeamKind kind : {BeamKind::parallel, BeamKind::fan}) {
    const CaseBundle b = simulate_case(air, kind, parse_window("2048x0"), opt);
    REQUIRE(b.residual.size() == 3);
    for (const auto& [views, r] : b.residual)
      for (float x : r.values()) CHECK(x == 0.0f);
  }
}

TEST_CASE("sparse error shrinks as views increase") {
  const Shape3 shape{48, 48, 2};
  const VoxelVolume hu = generate_phantom(shape, {}, thorax_specs(shape, {}, 2, true));
  SimulationOptions opt;
  opt.full_views = 512;
  for (BeamKind kind : {BeamKind::parallel, BeamKind::fan, BeamKind::cone}) {
    CAPTURE(to_string(kind));
    const CaseBundle b = simulate_case(hu, kind, parse_window("2048x0"), opt, "S07");
    CHECK(b.subject == "S07");
    CHECK(b.full.unit() == Unit::normalized);
    double previous = 1e9;
    for (int level : kSparseLevels) {
      const double err = mse(b.full, b.sparse.at(level));
      CHECK(err < previous);
      CHECK(err > 0.0);
      previous = err;
      CHECK(b.sparse.at(level).shape() == shape);
    }
  }
}

TEST_CASE("simulate_case validates its options") {
  const VoxelVolume air({16, 16, 1}, {}, Unit::hu, kAirHu);
  SimulationOptions opt;
  opt.full_views = 100;
  CHECK_THROWS_AS(simulate_case(air, BeamKind::fan, parse_window("2048x0"), opt), InvalidInput);
  const VoxelVolume wide({16, 12, 1}, {}, Unit::hu, kAirHu);
  CHECK_THROWS_AS(simulate_case(wide, BeamKind::fan, parse_window("2048x0")), InvalidInput);
}
