// Joseph interpolation along one ray. `Volumetric` adds linear
// interpolation along z (cone beam); otherwise the slice is 2D.
#pragma once

#include <cmath>

#include "ray_geometry.hpp"

namespace sparsect::detail {

template <bool Volumetric>
inline double sample_row(const float* f, const Grid& g, int j, double a, double zw) {
  const double fi = g.fi(a);
  const double i0f = std::floor(fi);
  const int i0 = static_cast<int>(i0f);
  const double w = fi - i0f;
  if (i0 < -1 || i0 >= g.nx) return 0.0;
  if constexpr (!Volumetric) {
    const float* row = f + static_cast<std::ptrdiff_t>(j) * g.nx;
    double v = 0.0;
    if (i0 >= 0) v += (1.0 - w) * row[i0];
    if (i0 + 1 < g.nx) v += w * row[i0 + 1];
    return v;
  } else {
    const double fk = g.fk(zw);
    const double k0f = std::floor(fk);
    const int k0 = static_cast<int>(k0f);
    const double wz = fk - k0f;
    if (k0 < -1 || k0 >= g.nz) return 0.0;
    const std::ptrdiff_t plane = static_cast<std::ptrdiff_t>(g.nx) * g.ny;
    double v = 0.0;
    for (int dk = 0; dk < 2; ++dk) {
      const int k = k0 + dk;
      if (k < 0 || k >= g.nz) continue;
      const double wk = dk == 0 ? 1.0 - wz : wz;
      const float* row = f + k * plane + static_cast<std::ptrdiff_t>(j) * g.nx;
      if (i0 >= 0) v += wk * (1.0 - w) * row[i0];
      if (i0 + 1 < g.nx) v += wk * w * row[i0 + 1];
    }
    return v;
  }
}

template <bool Volumetric>
inline double sample_col(const float* f, const Grid& g, int i, double a, double zw) {
  const double fj = g.fj(a);
  const double j0f = std::floor(fj);
  const int j0 = static_cast<int>(j0f);
  const double w = fj - j0f;
  if (j0 < -1 || j0 >= g.ny) return 0.0;
  const std::ptrdiff_t nx = g.nx;
  if constexpr (!Volumetric) {
    double v = 0.0;
    if (j0 >= 0) v += (1.0 - w) * f[j0 * nx + i];
    if (j0 + 1 < g.ny) v += w * f[(j0 + 1) * nx + i];
    return v;
  } else {
    const double fk = g.fk(zw);
    const double k0f = std::floor(fk);
    const int k0 = static_cast<int>(k0f);
    const double wz = fk - k0f;
    if (k0 < -1 || k0 >= g.nz) return 0.0;
    const std::ptrdiff_t plane = nx * g.ny;
    double v = 0.0;
    for (int dk = 0; dk < 2; ++dk) {
      const int k = k0 + dk;
      if (k < 0 || k >= g.nz) continue;
      const double wk = dk == 0 ? 1.0 - wz : wz;
      const float* base = f + k * plane + i;
      if (j0 >= 0) v += wk * (1.0 - w) * base[j0 * nx];
      if (j0 + 1 < g.ny) v += wk * w * base[(j0 + 1) * nx];
    }
    return v;
  }
}

/// Interpolation weight of grid index `n` at fractional position `f`.
inline double hat(double f, int n) { return 1.0 - std::fabs(f - n); }

}  // namespace sparsect::detail
