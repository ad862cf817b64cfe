// Internal ray helpers shared by the parallel kernels and the serial
// reference so both evaluate bit-identical interpolation weights.
#pragma once

#include <cmath>

#include "sparsect/core.hpp"

namespace sparsect::detail {

struct Grid {
  int nx, ny, nz;
  double px, py, pz;
  double cx, cy, cz;

  Grid(Shape3 s, Spacing3 sp)
      : nx(s.nx), ny(s.ny), nz(s.nz), px(sp.sx), py(sp.sy), pz(sp.sz),
        cx(0.5 * (s.nx - 1)), cy(0.5 * (s.ny - 1)), cz(0.5 * (s.nz - 1)) {}

  [[nodiscard]] double x(int i) const { return (i - cx) * px; }
  [[nodiscard]] double y(int j) const { return (j - cy) * py; }
  [[nodiscard]] double z(int k) const { return (k - cz) * pz; }
  [[nodiscard]] double fi(double xw) const { return xw / px + cx; }
  [[nodiscard]] double fj(double yw) const { return yw / py + cy; }
  [[nodiscard]] double fk(double zw) const { return zw / pz + cz; }
};

/// origin + t * dir; dir is unnormalised (source to detector element for
/// diverging beams, e_r for parallel beams).
struct Ray {
  double ox, oy, oz;
  double dx, dy, dz;

  [[nodiscard]] bool y_dominant() const { return std::fabs(dy) >= std::fabs(dx); }
  [[nodiscard]] double length() const { return std::sqrt(dx * dx + dy * dy + dz * dz); }
};

struct Crossing {
  double a;  // in-plane coordinate along the interpolated axis
  double z;
};

inline Crossing cross_row(const Ray& r, double y) {
  const double t = (y - r.oy) / r.dy;
  return {r.ox + t * r.dx, r.oz + t * r.dz};
}

inline Crossing cross_col(const Ray& r, double x) {
  const double t = (x - r.ox) / r.dx;
  return {r.oy + t * r.dy, r.oz + t * r.dz};
}

/// Path length per grid step along the dominant axis.
inline double row_step(const Ray& r, double py) { return py * r.length() / std::fabs(r.dy); }
inline double col_step(const Ray& r, double px) { return px * r.length() / std::fabs(r.dx); }

inline double det_u(const BeamGeometry& g, int d) {
  return (d - 0.5 * (g.det_count - 1)) * g.det_spacing;
}

inline double det_v(const BeamGeometry& g, int r) {
  if (g.kind != BeamKind::cone) return 0.0;
  return (r - 0.5 * (g.det_rows - 1)) * g.det_row_spacing;
}

inline Ray make_ray(const BeamGeometry& g, double c, double s, double u, double v) {
  if (g.kind == BeamKind::parallel) return {u * c, u * s, v, -s, c, 0.0};
  return {g.sod * s, -g.sod * c, 0.0, -g.sdd * s + u * c, g.sdd * c + u * s, v};
}

/// Detector coordinate hit by the ray through in-plane point (x, y).
inline double point_u(const BeamGeometry& g, double c, double s, double x, double y) {
  const double along_s = x * c + y * s;
  if (g.kind == BeamKind::parallel) return along_s;
  return g.sdd * along_s / (g.sod - x * s + y * c);
}

inline double det_index_u(const BeamGeometry& g, double u) {
  return u / g.det_spacing + 0.5 * (g.det_count - 1);
}

inline double det_index_v(const BeamGeometry& g, double v) {
  return v / g.det_row_spacing + 0.5 * (g.det_rows - 1);
}

}  // namespace sparsect::detail
