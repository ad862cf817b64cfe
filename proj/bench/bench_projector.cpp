// Serial reference vs OpenMP projector kernels.
#include <benchmark/benchmark.h>

#include "sparsect/phantom.hpp"
#include "sparsect/projector.hpp"
#include "sparsect/simulate.hpp"

using namespace sparsect;

namespace {

struct Case {
  VoxelVolume mu;
  BeamGeometry geo;
  std::vector<double> angles;
};

Case make_case(BeamKind kind, int n, int views) {
  const Shape3 shape{n, n, kind == BeamKind::cone ? n / 2 + 1 : 1};
  const Spacing3 spacing{1.0, 1.0, 1.0};
  const auto specs = thorax_specs(shape, spacing, 3, kind != BeamKind::cone);
  Case c{hu_to_attenuation(generate_phantom(shape, spacing, specs)),
         geometry_for_volume(kind, shape, spacing), {}};
  c.angles = scan_angles(c.geo, views);
  return c;
}

void BM_forward(benchmark::State& state, BeamKind kind, bool parallel) {
  const Case c = make_case(kind, static_cast<int>(state.range(0)), 64);
  for (auto _ : state) {
    Sinogram s = parallel ? forward_project(c.mu, c.geo, c.angles)
                          : reference::forward_project(c.mu, c.geo, c.angles);
    benchmark::DoNotOptimize(s.values.data());
  }
}

void BM_backproject(benchmark::State& state, BeamKind kind, bool parallel) {
  const Case c = make_case(kind, static_cast<int>(state.range(0)), 64);
  const Sinogram s = forward_project(c.mu, c.geo, c.angles);
  for (auto _ : state) {
    VoxelVolume v = parallel ? backproject(s, c.mu.shape(), c.mu.spacing())
                             : reference::backproject(s, c.mu.shape(), c.mu.spacing());
    benchmark::DoNotOptimize(v.values().data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_forward, parallel_omp, BeamKind::parallel, true)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_forward, parallel_ref, BeamKind::parallel, false)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_forward, fan_omp, BeamKind::fan, true)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_forward, fan_ref, BeamKind::fan, false)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_forward, cone_omp, BeamKind::cone, true)->Arg(64);
BENCHMARK_CAPTURE(BM_forward, cone_ref, BeamKind::cone, false)->Arg(64);
BENCHMARK_CAPTURE(BM_backproject, parallel_omp, BeamKind::parallel, true)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_backproject, parallel_ref, BeamKind::parallel, false)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_backproject, fan_omp, BeamKind::fan, true)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_backproject, fan_ref, BeamKind::fan, false)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_backproject, cone_omp, BeamKind::cone, true)->Arg(64);
BENCHMARK_CAPTURE(BM_backproject, cone_ref, BeamKind::cone, false)->Arg(64);

BENCHMARK_MAIN();
