#include "sparsect/projector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "joseph.hpp"

namespace sparsect {

using detail::Crossing;
using detail::Grid;
using detail::Ray;

void check_field_of_view(const BeamGeometry& geometry, Shape3 shape, Spacing3 spacing) {
  geometry.validate();
  if (geometry.kind == BeamKind::parallel) return;
  // Interpolation support reaches one voxel beyond the outermost centres.
  const double radius =
      0.5 * std::hypot((shape.nx + 1) * spacing.sx, (shape.ny + 1) * spacing.sy);
  if (!(radius < geometry.sod))
    throw GeometryError("object radius " + std::to_string(radius) +
                        " mm does not fit inside sod " + std::to_string(geometry.sod) + " mm");
  if (geometry.kind == BeamKind::cone) {
    const double v_max = 0.5 * (geometry.det_rows - 1) * geometry.det_row_spacing;
    if (!(v_max < geometry.sdd / std::sqrt(2.0)))
      throw GeometryError("cone angle too wide for in-plane ray stepping");
  }
}

namespace {

struct Trig {
  std::vector<double> c, s;
  explicit Trig(std::span<const double> angles) : c(angles.size()), s(angles.size()) {
    for (std::size_t v = 0; v < angles.size(); ++v) {
      c[v] = std::cos(angles[v]);
      s[v] = std::sin(angles[v]);
    }
  }
};

// Range of grid indices n for which f0 + slope * n lies in (-1, extent).
std::pair<int, int> clip_range(double f0, double slope, int count, int extent) {
  if (slope == 0.0) {
    if (f0 > -1.0 && f0 < extent) return {0, count - 1};
    return {0, -1};
  }
  double a = (-1.0 - f0) / slope;
  double b = (extent - f0) / slope;
  if (a > b) std::swap(a, b);
  // Clamp in double first: near-zero slopes push a and b far past int range.
  const double lo = std::max(0.0, std::floor(a) - 1.0);
  const double hi = std::min(count - 1.0, std::ceil(b) + 1.0);
  if (lo > hi) return {0, -1};
  return {static_cast<int>(lo), static_cast<int>(hi)};
}

template <bool Volumetric>
double project_ray(const float* f, const Grid& g, const Ray& ray) {
  double sum = 0.0;
  if (ray.y_dominant()) {
    // fi(j) is affine in j; skip rows the ray crosses outside the grid.
    const Crossing c0 = detail::cross_row(ray, g.y(0));
    const Crossing c1 = detail::cross_row(ray, g.y(1 < g.ny ? 1 : 0));
    const double slope = g.ny > 1 ? g.fi(c1.a) - g.fi(c0.a) : 0.0;
    const auto [lo, hi] = clip_range(g.fi(c0.a), slope, g.ny, g.nx);
    for (int j = lo; j <= hi; ++j) {
      const Crossing c = detail::cross_row(ray, g.y(j));
      sum += detail::sample_row<Volumetric>(f, g, j, c.a, c.z);
    }
    return sum * detail::row_step(ray, g.py);
  }
  const Crossing c0 = detail::cross_col(ray, g.x(0));
  const Crossing c1 = detail::cross_col(ray, g.x(1 < g.nx ? 1 : 0));
  const double slope = g.nx > 1 ? g.fj(c1.a) - g.fj(c0.a) : 0.0;
  const auto [lo, hi] = clip_range(g.fj(c0.a), slope, g.nx, g.ny);
  for (int i = lo; i <= hi; ++i) {
    const Crossing c = detail::cross_col(ray, g.x(i));
    sum += detail::sample_col<Volumetric>(f, g, i, c.a, c.z);
  }
  return sum * detail::col_step(ray, g.px);
}

template <bool Volumetric>
Sinogram project(const VoxelVolume& object, const BeamGeometry& geometry,
                 std::span<const double> angles) {
  check_field_of_view(geometry, object.shape(), object.spacing());
  Sinogram sino(geometry, {angles.begin(), angles.end()});
  const Grid g(object.shape(), object.spacing());
  const Trig trig(angles);
  const float* f = object.values().data();
  const int views = sino.views();
  const int rows = sino.rows();
  const int dets = sino.det_count();

#pragma omp parallel for collapse(2) schedule(dynamic, 4)
  for (int view = 0; view < views; ++view) {
    for (int row = 0; row < rows; ++row) {
      const double v = detail::det_v(geometry, row);
      float* out = &sino.values[sino.index(view, row, 0)];
      for (int d = 0; d < dets; ++d) {
        const Ray ray =
            detail::make_ray(geometry, trig.c[view], trig.s[view], detail::det_u(geometry, d), v);
        out[d] = static_cast<float>(project_ray<Volumetric>(f, g, ray));
      }
    }
  }
  return sino;
}

// Sum over all rays of one view that sample voxel (i, j, k), each weighted
// exactly as the forward projector weights that voxel.
template <bool Volumetric>
double gather_view(const Sinogram& sino, const Grid& g, int view, double c, double s, int i,
                   int j, int k) {
  const BeamGeometry& geo = sino.geometry;
  const double x = g.x(i);
  const double y = g.y(j);
  const double z = g.z(k);
  const int dets = geo.det_count;
  double acc = 0.0;

  auto det_window = [&](double ua, double ub) {
    const double ia = detail::det_index_u(geo, ua);
    const double ib = detail::det_index_u(geo, ub);
    const int lo = std::max(0, static_cast<int>(std::floor(std::min(ia, ib))) - 1);
    const int hi = std::min(dets - 1, static_cast<int>(std::ceil(std::max(ia, ib))) + 1);
    return std::pair{lo, hi};
  };

  auto accumulate_rows = [&](int d, const Ray& base, double in_plane_weight, double t,
                             bool y_family) {
    if constexpr (!Volumetric) {
      const double step = y_family ? detail::row_step(base, g.py) : detail::col_step(base, g.px);
      acc += sino.at(view, 0, d) * in_plane_weight * step;
    } else {
      // On a diverging ray z = t * v at the crossing, so the rows that land
      // within one voxel of z_k form a contiguous window.
      const double va = (z - g.pz) / t;
      const double vb = (z + g.pz) / t;
      const double ra = detail::det_index_v(geo, va);
      const double rb = detail::det_index_v(geo, vb);
      const int rlo = std::max(0, static_cast<int>(std::floor(std::min(ra, rb))) - 1);
      const int rhi =
          std::min(geo.det_rows - 1, static_cast<int>(std::ceil(std::max(ra, rb))) + 1);
      for (int r = rlo; r <= rhi; ++r) {
        const Ray ray = detail::make_ray(geo, c, s, detail::det_u(geo, d), detail::det_v(geo, r));
        const Crossing cr = y_family ? detail::cross_row(ray, y) : detail::cross_col(ray, x);
        const double wk = detail::hat(g.fk(cr.z), k);
        if (wk <= 0.0) continue;
        const double step = y_family ? detail::row_step(ray, g.py) : detail::col_step(ray, g.px);
        acc += sino.at(view, r, d) * in_plane_weight * wk * step;
      }
    }
  };

  {  // rays stepping along y that cross row j near column i
    const auto [lo, hi] = det_window(detail::point_u(geo, c, s, x - g.px, y),
                                     detail::point_u(geo, c, s, x + g.px, y));
    for (int d = lo; d <= hi; ++d) {
      const Ray base = detail::make_ray(geo, c, s, detail::det_u(geo, d), 0.0);
      if (!base.y_dominant()) continue;
      const double wi = detail::hat(g.fi(detail::cross_row(base, y).a), i);
      if (wi <= 0.0) continue;
      accumulate_rows(d, base, wi, (y - base.oy) / base.dy, true);
    }
  }
  {  // rays stepping along x that cross column i near row j
    const auto [lo, hi] = det_window(detail::point_u(geo, c, s, x, y - g.py),
                                     detail::point_u(geo, c, s, x, y + g.py));
    for (int d = lo; d <= hi; ++d) {
      const Ray base = detail::make_ray(geo, c, s, detail::det_u(geo, d), 0.0);
      if (base.y_dominant()) continue;
      const double wj = detail::hat(g.fj(detail::cross_col(base, x).a), j);
      if (wj <= 0.0) continue;
      accumulate_rows(d, base, wj, (x - base.ox) / base.dx, false);
    }
  }
  return acc;
}

template <bool Volumetric>
VoxelVolume gather(const Sinogram& sino, Shape3 shape, Spacing3 spacing) {
  VoxelVolume out(shape, spacing, Unit::attenuation);
  const Grid g(shape, spacing);
  const Trig trig(sino.angles);
  const int views = sino.views();
  float* f = out.values().data();

#pragma omp parallel for collapse(2) schedule(dynamic, 1)
  for (int k = 0; k < shape.nz; ++k) {
    for (int j = 0; j < shape.ny; ++j) {
      for (int i = 0; i < shape.nx; ++i) {
        double acc = 0.0;
        for (int view = 0; view < views; ++view)
          acc += gather_view<Volumetric>(sino, g, view, trig.c[view], trig.s[view], i, j, k);
        f[out.index(i, j, k)] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

}  // namespace

Sinogram forward_project_slice(const VoxelVolume& slice, const BeamGeometry& geometry,
                               std::span<const double> angles) {
  if (geometry.kind == BeamKind::cone)
    throw InvalidInput("forward_project_slice needs a parallel or fan geometry");
  if (!slice.is_image() || slice.shape().nx != slice.shape().ny)
    throw InvalidInput("forward_project_slice needs a square 2D slice");
  return project<false>(slice, geometry, angles);
}

Sinogram forward_project_cone(const VoxelVolume& volume, const BeamGeometry& geometry,
                              std::span<const double> angles) {
  if (geometry.kind != BeamKind::cone)
    throw InvalidInput("forward_project_cone needs a cone geometry");
  return project<true>(volume, geometry, angles);
}

Sinogram forward_project(const VoxelVolume& object, const BeamGeometry& geometry,
                         std::span<const double> angles) {
  if (geometry.kind == BeamKind::cone) return forward_project_cone(object, geometry, angles);
  return forward_project_slice(object, geometry, angles);
}

VoxelVolume backproject(const Sinogram& sino, Shape3 shape, Spacing3 spacing) {
  sino.validate();
  check_field_of_view(sino.geometry, shape, spacing);
  if (sino.geometry.kind == BeamKind::cone) return gather<true>(sino, shape, spacing);
  if (shape.nz != 1) throw InvalidInput("parallel/fan backprojection targets a 2D slice");
  return gather<false>(sino, shape, spacing);
}

}  // namespace sparsect
