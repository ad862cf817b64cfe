// Analytic reconstruction: ramp-filtered backprojection (parallel, fan)
// and Feldkamp-Davis-Kress (cone). The backprojection step here is
// voxel-driven with linear detector interpolation; it is not the adjoint
// in projector.hpp.
#pragma once

#include <vector>

#include "sparsect/core.hpp"

namespace sparsect {

enum class FilterKind { ram_lak, hann };

std::string_view to_string(FilterKind kind);
FilterKind filter_kind_from_string(std::string_view name);

struct FilterSpec {
  FilterKind kind = FilterKind::ram_lak;
  /// Rows are zero-padded to the next power of two >= padding * det_count.
  int padding = 2;

  void validate() const;
};

/// Spatial Ram-Lak tap at integer offset n for detector spacing ds:
/// 1/(4 ds^2) at 0, 0 at even offsets, -1/(pi n ds)^2 at odd offsets.
double ram_lak_tap(int n, double spacing);

/// Length of the zero-padded row used for frequency-domain filtering.
int padded_length(int det_count, const FilterSpec& filter);

/// Frequency response (padded_length/2 + 1 bins) applied to each row: the
/// exact DFT of the circularly wrapped taps. The small positive DC gain of
/// the truncated kernel is kept; zeroing it biases flat regions low.
std::vector<double> ramp_frequency_response(int det_count, double spacing,
                                            const FilterSpec& filter);

/// Convolves every detector row with the ramp kernel for the sinogram's
/// detector spacing. The output is the discrete convolution sum; callers
/// multiply by the sample spacing to approximate the continuous integral.
Sinogram ramp_filter(const Sinogram& sino, const FilterSpec& filter = {});

/// (pi / views) * backprojection of the filtered parallel-beam sinogram.
VoxelVolume fbp_parallel(const Sinogram& sino, Shape3 shape, Spacing3 spacing,
                         const FilterSpec& filter = {});

/// Equispaced flat-detector fan-beam FBP over a full turn.
VoxelVolume fbp_fan(const Sinogram& sino, Shape3 shape, Spacing3 spacing,
                    const FilterSpec& filter = {});

/// Feldkamp-Davis-Kress over a full circular turn with a flat panel.
VoxelVolume fdk_cone(const Sinogram& sino, Shape3 shape, Spacing3 spacing,
                     const FilterSpec& filter = {});

/// Dispatches on the sinogram's geometry. Output unit: attenuation.
VoxelVolume reconstruct(const Sinogram& sino, Shape3 shape, Spacing3 spacing,
                        const FilterSpec& filter = {});

}  // namespace sparsect
