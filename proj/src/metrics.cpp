#include "sparsect/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>
#include <tuple>

namespace sparsect {

void SsimParams::validate() const {
  if (window < 1 || window % 2 == 0) throw InvalidInput("SSIM window must be odd");
  if (!(k1 > 0.0 && k2 > 0.0)) throw InvalidInput("SSIM constants must be positive");
  if (!(data_range > 0.0)) throw InvalidInput("SSIM data range must be positive");
}

double mse(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw InvalidInput("mse: shape mismatch");
  if (a.empty()) throw InvalidInput("mse: empty input");
  double sum = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double d = static_cast<double>(a[n]) - static_cast<double>(b[n]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

double mse(const VoxelVolume& a, const VoxelVolume& b) {
  require_same_shape(a, b, "mse");
  return mse(a.values(), b.values());
}

namespace {

// Horizontal then vertical window sums over fully-contained positions.
std::vector<double> box_sums(const std::vector<double>& img, int rows, int cols, int w) {
  const int out_cols = cols - w + 1;
  const int out_rows = rows - w + 1;
  std::vector<double> horiz(static_cast<std::size_t>(rows) * out_cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < out_cols; ++c) {
      double s = 0.0;
      const double* p = &img[static_cast<std::size_t>(r) * cols + c];
      for (int t = 0; t < w; ++t) s += p[t];
      horiz[static_cast<std::size_t>(r) * out_cols + c] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(out_rows) * out_cols);
  for (int r = 0; r < out_rows; ++r)
    for (int c = 0; c < out_cols; ++c) {
      double s = 0.0;
      for (int t = 0; t < w; ++t) s += horiz[static_cast<std::size_t>(r + t) * out_cols + c];
      out[static_cast<std::size_t>(r) * out_cols + c] = s;
    }
  return out;
}

}  // namespace

double ssim(std::span<const float> a, std::span<const float> b, int rows, int cols,
            const SsimParams& p) {
  p.validate();
  if (a.size() != b.size() || a.size() != static_cast<std::size_t>(rows) * cols)
    throw InvalidInput("ssim: shape mismatch");
  if (rows < p.window || cols < p.window) throw InvalidInput("ssim: image smaller than window");

  const std::size_t n = a.size();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = a[i];
    y[i] = b[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const int w = p.window;
  const auto sx = box_sums(x, rows, cols, w);
  const auto sy = box_sums(y, rows, cols, w);
  const auto sxx = box_sums(xx, rows, cols, w);
  const auto syy = box_sums(yy, rows, cols, w);
  const auto sxy = box_sums(xy, rows, cols, w);

  const double np = static_cast<double>(w) * w;
  const double cov_norm = np / (np - 1.0);
  const double c1 = (p.k1 * p.data_range) * (p.k1 * p.data_range);
  const double c2 = (p.k2 * p.data_range) * (p.k2 * p.data_range);
  double total = 0.0;
  for (std::size_t i = 0; i < sx.size(); ++i) {
    const double ux = sx[i] / np;
    const double uy = sy[i] / np;
    const double vx = cov_norm * (sxx[i] / np - ux * ux);
    const double vy = cov_norm * (syy[i] / np - uy * uy);
    const double vxy = cov_norm * (sxy[i] / np - ux * uy);
    total += ((2.0 * ux * uy + c1) * (2.0 * vxy + c2)) /
             ((ux * ux + uy * uy + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(sx.size());
}

double ssim(const VoxelVolume& a, const VoxelVolume& b, const SsimParams& params) {
  require_same_shape(a, b, "ssim");
  if (!a.is_image()) throw InvalidInput("ssim: expected 2D images");
  return ssim(a.values(), b.values(), a.shape().ny, a.shape().nx, params);
}

std::vector<double> slice_mse(const VoxelVolume& a, const VoxelVolume& b) {
  require_same_shape(a, b, "slice_mse");
  const Shape3& s = a.shape();
  const std::size_t plane = static_cast<std::size_t>(s.nx) * s.ny;
  std::vector<double> out(static_cast<std::size_t>(s.nz));
  for (int k = 0; k < s.nz; ++k)
    out[k] = mse(a.values().subspan(plane * k, plane), b.values().subspan(plane * k, plane));
  return out;
}

std::vector<double> slice_ssim(const VoxelVolume& a, const VoxelVolume& b,
                               const SsimParams& params) {
  require_same_shape(a, b, "slice_ssim");
  const Shape3& s = a.shape();
  const std::size_t plane = static_cast<std::size_t>(s.nx) * s.ny;
  std::vector<double> out(static_cast<std::size_t>(s.nz));
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < s.nz; ++k)
    out[k] = ssim(a.values().subspan(plane * k, plane), b.values().subspan(plane * k, plane),
                  s.ny, s.nx, params);
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("mean of an empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

ScoreRow score_volumes(int views, const VoxelVolume& full, const VoxelVolume& sparse,
                       const VoxelVolume& corrected, const SsimParams& params) {
  require_same_shape(sparse, full, "score_volumes");
  require_same_shape(corrected, full, "score_volumes");
  const VoxelVolume fixed = clip_normalized(corrected);
  ScoreRow row;
  row.views = views;
  row.sparse_mse = mean(slice_mse(sparse, full));
  row.corrected_mse = mean(slice_mse(fixed, full));
  row.sparse_ssim = mean(slice_ssim(sparse, full, params));
  row.corrected_ssim = mean(slice_ssim(fixed, full, params));
  return row;
}

double patch_mse(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) throw InvalidInput("patch_mse: shape mismatch");
  return mse(a.values, b.values);
}

double patch_ssim(const Tensor& a, const Tensor& b, const SsimParams& params) {
  if (a.shape != b.shape) throw InvalidInput("patch_ssim: shape mismatch");
  if (a.shape.size() != 3) throw InvalidInput("patch_ssim: expected (rows, cols, channels)");
  const int rows = a.shape[0], cols = a.shape[1], channels = a.shape[2];
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  std::vector<float> ca(plane), cb(plane);
  double total = 0.0;
  for (int ch = 0; ch < channels; ++ch) {
    for (std::size_t n = 0; n < plane; ++n) {
      ca[n] = a.values[n * channels + ch];
      cb[n] = b.values[n * channels + ch];
    }
    total += ssim(ca, cb, rows, cols, params);
  }
  return total / channels;
}

CaseScores score_case(const CaseBundle& bundle, const std::map<int, VoxelVolume>& corrected,
                      const SsimParams& params) {
  CaseScores out{bundle.subject, bundle.geometry, "2d", {}};
  for (const auto& [views, sparse] : bundle.sparse) {
    const auto it = corrected.find(views);
    if (it == corrected.end())
      throw IncompleteSetError("score_case: no corrected volume for " + std::to_string(views) +
                               " views");
    out.rows.push_back(score_volumes(views, bundle.full, sparse, it->second, params));
  }
  return out;
}

std::vector<CaseScores> aggregate_scores(std::span<const CaseScores> cases) {
  using Key = std::tuple<BeamKind, std::string>;
  std::map<Key, std::map<int, std::vector<ScoreRow>>> groups;
  for (const auto& c : cases)
    for (const auto& r : c.rows) groups[{c.geometry, c.mode}][r.views].push_back(r);

  std::vector<CaseScores> out;
  for (const auto& [key, by_views] : groups) {
    CaseScores agg{"mean", std::get<0>(key), std::get<1>(key), {}};
    for (const auto& [views, rows] : by_views) {
      ScoreRow m;
      m.views = views;
      for (const auto& r : rows) {
        m.sparse_mse += r.sparse_mse;
        m.corrected_mse += r.corrected_mse;
        m.sparse_ssim += r.sparse_ssim;
        m.corrected_ssim += r.corrected_ssim;
      }
      const double n = static_cast<double>(rows.size());
      m.sparse_mse /= n;
      m.corrected_mse /= n;
      m.sparse_ssim /= n;
      m.corrected_ssim /= n;
      agg.rows.push_back(m);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

namespace {
std::string fmt(double v, bool scientific) {
  char buf[32];
  std::snprintf(buf, sizeof buf, scientific ? "%.6e" : "%.6f", v);
  return buf;
}
}  // namespace

void write_scores_long(std::ostream& out, std::span<const CaseScores> cases) {
  out << "subject\tgeometry\tmode\tviews\tsparse_mse\tcorrected_mse\tsparse_ssim\tcorrected_ssim\n";
  for (const auto& c : cases)
    for (const auto& r : c.rows)
      out << c.subject << '\t' << to_string(c.geometry) << '\t' << c.mode << '\t' << r.views
          << '\t' << fmt(r.sparse_mse, true) << '\t' << fmt(r.corrected_mse, true) << '\t'
          << fmt(r.sparse_ssim, false) << '\t' << fmt(r.corrected_ssim, false) << '\n';
}

void write_scores_table(std::ostream& out, std::span<const CaseScores> aggregated) {
  std::vector<BeamKind> geometries;
  std::map<BeamKind, std::vector<const CaseScores*>> by_geometry;
  std::set<int> views;
  for (const auto& c : aggregated) {
    if (by_geometry[c.geometry].empty()) geometries.push_back(c.geometry);
    by_geometry[c.geometry].push_back(&c);
    for (const auto& r : c.rows) views.insert(r.views);
  }
  std::sort(geometries.begin(), geometries.end());

  auto find_row = [](const CaseScores& c, int v) -> const ScoreRow* {
    for (const auto& r : c.rows)
      if (r.views == v) return &r;
    return nullptr;
  };

  out << "metric\tviews";
  for (BeamKind g : geometries) {
    out << '\t' << to_string(g) << ":sparse";
    for (const CaseScores* c : by_geometry[g]) out << '\t' << to_string(g) << ':' << c->mode;
  }
  out << '\n';
  for (const bool is_mse : {true, false}) {
    for (int v : views) {
      out << (is_mse ? "MSE" : "SSIM") << '\t' << v;
      for (BeamKind g : geometries) {
        const auto& cols = by_geometry[g];
        const ScoreRow* first = find_row(*cols.front(), v);
        out << '\t'
            << (first ? fmt(is_mse ? first->sparse_mse : first->sparse_ssim, is_mse) : "NA");
        for (const CaseScores* c : cols) {
          const ScoreRow* r = find_row(*c, v);
          out << '\t'
              << (r ? fmt(is_mse ? r->corrected_mse : r->corrected_ssim, is_mse) : "NA");
        }
      }
      out << '\n';
    }
  }
}

}  // namespace sparsect
