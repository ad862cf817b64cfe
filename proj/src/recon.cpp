#include "sparsect/recon.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>

namespace sparsect {

std::string_view to_string(FilterKind kind) {
  return kind == FilterKind::hann ? "hann" : "ram-lak";
}

FilterKind filter_kind_from_string(std::string_view name) {
  if (name == "ram-lak") return FilterKind::ram_lak;
  if (name == "hann") return FilterKind::hann;
  throw InvalidInput("unknown filter '" + std::string(name) + "'");
}

void FilterSpec::validate() const {
  if (padding < 2) throw InvalidInput("filter zero-padding factor must be >= 2");
}

double ram_lak_tap(int n, double spacing) {
  if (n == 0) return 1.0 / (4.0 * spacing * spacing);
  if (n % 2 == 0) return 0.0;
  const double d = kPi * n * spacing;
  return -1.0 / (d * d);
}

int padded_length(int det_count, const FilterSpec& filter) {
  filter.validate();
  int length = 1;
  while (length < filter.padding * det_count) length *= 2;
  return length;
}

namespace {

// FFTW's planner is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

struct Workspace {
  std::unique_ptr<double, FftwFree> real;
  std::unique_ptr<fftw_complex, FftwFree> spectrum;

  explicit Workspace(int length)
      : real(fftw_alloc_real(static_cast<std::size_t>(length))),
        spectrum(fftw_alloc_complex(static_cast<std::size_t>(length / 2 + 1))) {}
};

class RowFilter {
 public:
  RowFilter(int det_count, double spacing, const FilterSpec& filter)
      : det_count_(det_count),
        length_(padded_length(det_count, filter)),
        response_(ramp_frequency_response(det_count, spacing, filter)) {
    Workspace probe(length_);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(length_, probe.real.get(), probe.spectrum.get(),
                                    FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(length_, probe.spectrum.get(), probe.real.get(),
                                    FFTW_ESTIMATE);
  }
  RowFilter(const RowFilter&) = delete;
  RowFilter& operator=(const RowFilter&) = delete;
  ~RowFilter() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  [[nodiscard]] int length() const { return length_; }

  void apply(float* row, Workspace& ws) const {
    double* re = ws.real.get();
    std::fill(re, re + length_, 0.0);
    std::copy(row, row + det_count_, re);
    fftw_execute_dft_r2c(forward_, re, ws.spectrum.get());
    fftw_complex* spec = ws.spectrum.get();
    for (int k = 0; k <= length_ / 2; ++k) {
      spec[k][0] *= response_[k];
      spec[k][1] *= response_[k];
    }
    fftw_execute_dft_c2r(inverse_, spec, re);
    const double scale = 1.0 / length_;
    for (int d = 0; d < det_count_; ++d) row[d] = static_cast<float>(re[d] * scale);
  }

 private:
  int det_count_;
  int length_;
  std::vector<double> response_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

// Filters all rows of `values` (n_rows x det_count) in place.
void filter_rows(std::vector<float>& values, int n_rows, int det_count, double spacing,
                 const FilterSpec& filter) {
  const RowFilter rf(det_count, spacing, filter);
#pragma omp parallel
  {
    Workspace ws(rf.length());
#pragma omp for schedule(static)
    for (int r = 0; r < n_rows; ++r)
      rf.apply(values.data() + static_cast<std::size_t>(r) * det_count, ws);
  }
}

double lerp_row(const float* row, int n, double f) {
  const double f0 = std::floor(f);
  const int i0 = static_cast<int>(f0);
  if (i0 < -1 || i0 >= n) return 0.0;
  const double w = f - f0;
  double v = 0.0;
  if (i0 >= 0) v += (1.0 - w) * row[i0];
  if (i0 + 1 < n) v += w * row[i0 + 1];
  return v;
}

void require_kind(const Sinogram& sino, BeamKind kind, Shape3 shape) {
  sino.validate();
  if (sino.geometry.kind != kind)
    throw InvalidInput("reconstruction expects a " + std::string(to_string(kind)) +
                       " sinogram");
  if (kind != BeamKind::cone && shape.nz != 1)
    throw InvalidInput("parallel/fan reconstruction produces a 2D slice");
  if (sino.views() < 1) throw InvalidInput("sinogram has no views");
}

struct Centres {
  double cx, cy, cz;
  explicit Centres(Shape3 s) : cx(0.5 * (s.nx - 1)), cy(0.5 * (s.ny - 1)), cz(0.5 * (s.nz - 1)) {}
};

}  // namespace

std::vector<double> ramp_frequency_response(int det_count, double spacing,
                                            const FilterSpec& filter) {
  if (det_count < 1) throw InvalidInput("det_count must be >= 1");
  if (!(spacing > 0.0)) throw InvalidInput("filter spacing must be positive");
  const int length = padded_length(det_count, filter);
  const int half = length / 2;
  // Circularly symmetric spatial kernel; the real DFT of an even sequence is
  // real, evaluated directly as a cosine sum over the taps.
  std::vector<double> taps(static_cast<std::size_t>(half + 1));
  for (int n = 0; n <= half; ++n) taps[n] = ram_lak_tap(n, spacing);
  std::vector<double> response(static_cast<std::size_t>(half + 1));
  for (int k = 0; k <= half; ++k) {
    double sum = taps[0];
    for (int n = 1; n < half; n += 2)  // even taps are zero
      sum += 2.0 * taps[n] * std::cos(2.0 * kPi * k * n / length);
    if (half % 2 == 1) sum += taps[half] * std::cos(kPi * k);
    response[k] = sum;
  }
  if (filter.kind == FilterKind::hann)
    for (int k = 0; k <= half; ++k) response[k] *= 0.5 * (1.0 + std::cos(kPi * k / half));
  return response;
}

Sinogram ramp_filter(const Sinogram& sino, const FilterSpec& filter) {
  sino.validate();
  Sinogram out = sino;
  filter_rows(out.values, sino.views() * sino.rows(), sino.det_count(),
              sino.geometry.det_spacing, filter);
  return out;
}

VoxelVolume fbp_parallel(const Sinogram& sino, Shape3 shape, Spacing3 spacing,
                         const FilterSpec& filter) {
  require_kind(sino, BeamKind::parallel, shape);
  const BeamGeometry& geo = sino.geometry;
  const Sinogram q = ramp_filter(sino, filter);
  const int views = sino.views();
  const int dets = geo.det_count;
  const double det_centre = 0.5 * (dets - 1);
  const double scale = geo.angular_range / views * geo.det_spacing;
  const Centres ctr(shape);

  std::vector<double> cs(static_cast<std::size_t>(views)), sn(cs.size());
  for (int v = 0; v < views; ++v) {
    cs[v] = std::cos(sino.angles[v]) / geo.det_spacing;
    sn[v] = std::sin(sino.angles[v]) / geo.det_spacing;
  }

  VoxelVolume out(shape, spacing, Unit::attenuation);
  float* f = out.values().data();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < shape.ny; ++j) {
    const double y = (j - ctr.cy) * spacing.sy;
    for (int i = 0; i < shape.nx; ++i) {
      const double x = (i - ctr.cx) * spacing.sx;
      double acc = 0.0;
      for (int v = 0; v < views; ++v)
        acc += lerp_row(&q.values[q.index(v, 0, 0)], dets, x * cs[v] + y * sn[v] + det_centre);
      f[out.index(i, j, 0)] = static_cast<float>(acc * scale);
    }
  }
  return out;
}

namespace {

// Shared fan/cone path: pre-weight, filter along u at isocentre spacing,
// then distance-weighted voxel-driven backprojection.
VoxelVolume weighted_fbp(const Sinogram& sino, Shape3 shape, Spacing3 spacing,
                         const FilterSpec& filter, bool cone) {
  const BeamGeometry& geo = sino.geometry;
  const int views = sino.views();
  const int rows = sino.rows();
  const int dets = geo.det_count;
  const double mag = geo.magnification();
  const double sod = geo.sod;
  const double du = geo.det_spacing / mag;  // isocentre-scaled spacings
  const double dv = geo.det_row_spacing / mag;
  const double u_centre = 0.5 * (dets - 1);
  const double v_centre = 0.5 * (rows - 1);

  Sinogram q = sino;
  for (int v = 0; v < views; ++v)
    for (int r = 0; r < rows; ++r) {
      const double vv = cone ? (r - v_centre) * dv : 0.0;
      for (int d = 0; d < dets; ++d) {
        const double uu = (d - u_centre) * du;
        q.at(v, r, d) *= static_cast<float>(sod / std::sqrt(sod * sod + uu * uu + vv * vv));
      }
    }
  filter_rows(q.values, views * rows, dets, du, filter);

  // 1/2 compensates for every ray being measured twice over a full turn.
  const double scale = 0.5 * geo.angular_range / views * du;
  std::vector<double> cs(static_cast<std::size_t>(views)), sn(cs.size());
  for (int v = 0; v < views; ++v) {
    cs[v] = std::cos(sino.angles[v]);
    sn[v] = std::sin(sino.angles[v]);
  }
  const Centres ctr(shape);
  VoxelVolume out(shape, spacing, Unit::attenuation);
  float* f = out.values().data();

#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < shape.nz; ++k) {
    for (int j = 0; j < shape.ny; ++j) {
      const double z = (k - ctr.cz) * spacing.sz;
      const double y = (j - ctr.cy) * spacing.sy;
      for (int i = 0; i < shape.nx; ++i) {
        const double x = (i - ctr.cx) * spacing.sx;
        double acc = 0.0;
        for (int v = 0; v < views; ++v) {
          const double depth = sod - x * sn[v] + y * cs[v];  // sod + x . e_r
          const double inv_depth = 1.0 / depth;
          const double u_iso = sod * (x * cs[v] + y * sn[v]) * inv_depth;
          const double fu = u_iso / du + u_centre;
          const double weight = sod * sod * inv_depth * inv_depth;  // 1 / U^2
          double sample;
          if (!cone) {
            sample = lerp_row(&q.values[q.index(v, 0, 0)], dets, fu);
          } else {
            const double fv = sod * z * inv_depth / dv + v_centre;
            const double fv0 = std::floor(fv);
            const int r0 = static_cast<int>(fv0);
            const double wv = fv - fv0;
            sample = 0.0;
            if (r0 >= 0 && r0 < rows)
              sample += (1.0 - wv) * lerp_row(&q.values[q.index(v, r0, 0)], dets, fu);
            if (r0 + 1 >= 0 && r0 + 1 < rows)
              sample += wv * lerp_row(&q.values[q.index(v, r0 + 1, 0)], dets, fu);
          }
          acc += weight * sample;
        }
        f[out.index(i, j, k)] = static_cast<float>(acc * scale);
      }
    }
  }
  return out;
}

}  // namespace

VoxelVolume fbp_fan(const Sinogram& sino, Shape3 shape, Spacing3 spacing,
                    const FilterSpec& filter) {
  require_kind(sino, BeamKind::fan, shape);
  return weighted_fbp(sino, shape, spacing, filter, false);
}

VoxelVolume fdk_cone(const Sinogram& sino, Shape3 shape, Spacing3 spacing,
                     const FilterSpec& filter) {
  require_kind(sino, BeamKind::cone, shape);
  return weighted_fbp(sino, shape, spacing, filter, true);
}

VoxelVolume reconstruct(const Sinogram& sino, Shape3 shape, Spacing3 spacing,
                        const FilterSpec& filter) {
  switch (sino.geometry.kind) {
    case BeamKind::parallel: return fbp_parallel(sino, shape, spacing, filter);
    case BeamKind::fan: return fbp_fan(sino, shape, spacing, filter);
    case BeamKind::cone: return fdk_cone(sino, shape, spacing, filter);
  }
  throw InvalidInput("unknown geometry");
}

}  // namespace sparsect
