// Sparse-view simulation: full and sparse reconstructions, HU windowing,
// residual targets and correction.
//
// Sign conventions:
//   residual  = full - sparse     (the difference image)
//   artifact  = sparse - full     (what a network is trained to predict)
//   corrected = sparse - predicted artifact
//
// Normalised values are snapped to multiples of 2^-24, which makes every
// difference above exactly representable in float, so
// apply_correction(sparse, sparse - full) == full bit for bit.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "sparsect/core.hpp"
#include "sparsect/recon.hpp"

namespace sparsect {

/// Linear attenuation of water (1/mm) used to convert HU for projection.
inline constexpr double kMuWater = 0.02;

/// Sparse view levels simulated by default.
inline const std::vector<int> kSparseLevels = {32, 64, 128};

/// Keeps every (views / kept)-th view starting at view 0.
Sinogram subsample_views(const Sinogram& sino, int kept);

/// Clips a HU value to the window bounds (no normalisation).
float clip_to_window(float hu, const WindowSpec& window);

VoxelVolume window_normalize(const VoxelVolume& hu_volume, const WindowSpec& window);

VoxelVolume hu_to_attenuation(const VoxelVolume& hu_volume);
VoxelVolume attenuation_to_hu(const VoxelVolume& mu_volume);

/// full - sparse, unit difference.
VoxelVolume residual_target(const VoxelVolume& full, const VoxelVolume& sparse);

/// sparse - full, unit difference; the network target.
VoxelVolume artifact_target(const VoxelVolume& full, const VoxelVolume& sparse);

/// sparse - predicted_artifact, unclipped. Tagged normalized when every
/// value lies in [0, 1], difference otherwise.
VoxelVolume apply_correction(const VoxelVolume& sparse, const VoxelVolume& predicted_artifact);

/// Clamps to [0, 1] and tags the result normalized.
VoxelVolume clip_normalized(const VoxelVolume& volume);

struct CaseBundle {
  std::string subject;
  BeamKind geometry = BeamKind::parallel;
  WindowSpec window;
  VoxelVolume full;                      // normalized
  std::map<int, VoxelVolume> sparse;     // views -> normalized
  std::map<int, VoxelVolume> residual;   // views -> full - sparse
};

struct SimulationOptions {
  std::vector<int> sparse_levels = kSparseLevels;
  int full_views = kFullViews;
  FilterSpec filter{};
};

/// Projects at full_views, reconstructs the full-view reference and every
/// sparse level, windows everything and forms residuals. Parallel and fan
/// run slice by slice; cone projects the whole volume.
CaseBundle simulate_case(const VoxelVolume& hu_volume, BeamKind kind, const WindowSpec& window,
                         const SimulationOptions& options = {}, std::string subject = "S00");

/// Reconstruction of `hu_volume` at a single view count, in HU.
VoxelVolume simulate_reconstruction(const VoxelVolume& hu_volume, BeamKind kind, int views,
                                    const FilterSpec& filter = {});

}  // namespace sparsect
