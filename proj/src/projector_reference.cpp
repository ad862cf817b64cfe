// Serial reference projectors. Deliberately plain: every ray visits every
// row (or column) of the grid and the transpose scatters weights ray by
// ray. Used to validate the OpenMP kernels and as a benchmark baseline.
#include <cmath>

#include "ray_geometry.hpp"
#include "sparsect/projector.hpp"

namespace sparsect::reference {

namespace {

using detail::Crossing;
using detail::Grid;
using detail::Ray;

// Calls visit(voxel_index, weight) for every voxel the ray samples.
template <typename Visit>
void walk_ray(const Grid& g, const Ray& ray, bool volumetric, Visit&& visit) {
  const bool along_y = ray.y_dominant();
  const int steps = along_y ? g.ny : g.nx;
  const double step = along_y ? detail::row_step(ray, g.py) : detail::col_step(ray, g.px);
  const int extent = along_y ? g.nx : g.ny;
  for (int n = 0; n < steps; ++n) {
    const Crossing c = along_y ? detail::cross_row(ray, g.y(n)) : detail::cross_col(ray, g.x(n));
    const double f = along_y ? g.fi(c.a) : g.fj(c.a);
    const int m0 = static_cast<int>(std::floor(f));
    const double w = f - std::floor(f);
    int k0 = 0;
    double wz = 0.0;
    if (volumetric) {
      const double fk = g.fk(c.z);
      k0 = static_cast<int>(std::floor(fk));
      wz = fk - std::floor(fk);
    }
    for (int dk = 0; dk < (volumetric ? 2 : 1); ++dk) {
      const int k = k0 + dk;
      if (k < 0 || k >= g.nz) continue;
      const double wk = dk == 0 ? 1.0 - wz : wz;
      for (int dm = 0; dm < 2; ++dm) {
        const int m = m0 + dm;
        if (m < 0 || m >= extent) continue;
        const double wm = dm == 0 ? 1.0 - w : w;
        const int i = along_y ? m : n;
        const int j = along_y ? n : m;
        const std::size_t idx = static_cast<std::size_t>(i) +
                                static_cast<std::size_t>(g.nx) *
                                    (static_cast<std::size_t>(j) +
                                     static_cast<std::size_t>(g.ny) * static_cast<std::size_t>(k));
        visit(idx, step * wm * wk);
      }
    }
  }
}

}  // namespace

Sinogram forward_project(const VoxelVolume& object, const BeamGeometry& geometry,
                         std::span<const double> angles) {
  check_field_of_view(geometry, object.shape(), object.spacing());
  const bool volumetric = geometry.kind == BeamKind::cone;
  if (!volumetric && !object.is_image())
    throw InvalidInput("parallel/fan projection needs a 2D slice");
  Sinogram sino(geometry, {angles.begin(), angles.end()});
  const Grid g(object.shape(), object.spacing());
  const auto f = object.values();
  for (int view = 0; view < sino.views(); ++view) {
    const double c = std::cos(angles[view]);
    const double s = std::sin(angles[view]);
    for (int row = 0; row < sino.rows(); ++row) {
      for (int d = 0; d < sino.det_count(); ++d) {
        const Ray ray = detail::make_ray(geometry, c, s, detail::det_u(geometry, d),
                                         detail::det_v(geometry, row));
        double sum = 0.0;
        walk_ray(g, ray, volumetric, [&](std::size_t idx, double w) { sum += w * f[idx]; });
        sino.at(view, row, d) = static_cast<float>(sum);
      }
    }
  }
  return sino;
}

VoxelVolume backproject(const Sinogram& sino, Shape3 shape, Spacing3 spacing) {
  sino.validate();
  check_field_of_view(sino.geometry, shape, spacing);
  const bool volumetric = sino.geometry.kind == BeamKind::cone;
  if (!volumetric && shape.nz != 1)
    throw InvalidInput("parallel/fan backprojection targets a 2D slice");
  const Grid g(shape, spacing);
  std::vector<double> acc(shape.voxels(), 0.0);
  for (int view = 0; view < sino.views(); ++view) {
    const double c = std::cos(sino.angles[view]);
    const double s = std::sin(sino.angles[view]);
    for (int row = 0; row < sino.rows(); ++row) {
      for (int d = 0; d < sino.det_count(); ++d) {
        const double value = sino.at(view, row, d);
        if (value == 0.0) continue;
        const Ray ray = detail::make_ray(sino.geometry, c, s, detail::det_u(sino.geometry, d),
                                         detail::det_v(sino.geometry, row));
        walk_ray(g, ray, volumetric, [&](std::size_t idx, double w) { acc[idx] += w * value; });
      }
    }
  }
  std::vector<float> out(acc.begin(), acc.end());
  return {shape, spacing, Unit::attenuation, std::move(out)};
}

}  // namespace sparsect::reference
