// Image quality metrics: mean squared error and SSIM with a uniform
// window (7x7, k1 = 0.01, k2 = 0.03, sample covariance), averaged over the
// window positions that lie fully inside the image.
#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sparsect/core.hpp"
#include "sparsect/simulate.hpp"

namespace sparsect {

struct SsimParams {
  int window = 7;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;

  void validate() const;
};

double mse(std::span<const float> a, std::span<const float> b);
double mse(const VoxelVolume& a, const VoxelVolume& b);

/// SSIM of two rows x cols images stored row-major.
double ssim(std::span<const float> a, std::span<const float> b, int rows, int cols,
            const SsimParams& params = {});

/// SSIM of two 2D images (nz == 1).
double ssim(const VoxelVolume& a, const VoxelVolume& b, const SsimParams& params = {});

/// Per-axial-slice scores.
std::vector<double> slice_mse(const VoxelVolume& a, const VoxelVolume& b);
std::vector<double> slice_ssim(const VoxelVolume& a, const VoxelVolume& b,
                               const SsimParams& params = {});

double mean(std::span<const double> values);

struct ScoreRow {
  int views = 0;
  double sparse_mse = 0.0;
  double corrected_mse = 0.0;
  double sparse_ssim = 0.0;
  double corrected_ssim = 0.0;
};

struct CaseScores {
  std::string subject;
  BeamKind geometry = BeamKind::parallel;
  std::string mode = "2d";
  std::vector<ScoreRow> rows;  // ascending views
};

/// Mean slice-wise MSE and SSIM of the sparse input and of the corrected
/// volume (clipped to [0, 1]) against the full-view reference.
ScoreRow score_volumes(int views, const VoxelVolume& full, const VoxelVolume& sparse,
                       const VoxelVolume& corrected, const SsimParams& params = {});

/// Channel-last patches (rows, cols, channels): MSE over every value, SSIM
/// averaged over channels.
double patch_mse(const Tensor& a, const Tensor& b);
double patch_ssim(const Tensor& a, const Tensor& b, const SsimParams& params = {});

/// score_volumes for every sparse level of a bundle.
CaseScores score_case(const CaseBundle& bundle, const std::map<int, VoxelVolume>& corrected,
                      const SsimParams& params = {});

/// Mean over subjects of per-subject means, grouped by geometry and mode.
std::vector<CaseScores> aggregate_scores(std::span<const CaseScores> cases);

/// One line per (subject, geometry, mode, views) with all four scores.
void write_scores_long(std::ostream& out, std::span<const CaseScores> cases);

/// Wide table: an MSE block and an SSIM block, one row per view count, and
/// for each geometry a Sparse column followed by one column per mode.
void write_scores_table(std::ostream& out, std::span<const CaseScores> aggregated);

}  // namespace sparsect
