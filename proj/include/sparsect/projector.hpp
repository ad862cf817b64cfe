// Ray-driven (Joseph) forward projection and its exact adjoint.
//
// Each ray steps through the grid along its dominant in-plane axis; at
// every row (or column) crossing the image is linearly interpolated along
// the other in-plane axis (and along z for cone beams), weighted by the
// ray length per step. `backproject` is the exact transpose of that
// operator, evaluated pixel-driven so it parallelises without write races.
//
// The serial scatter-style transposes in `sparsect::reference` are kept
// for testing and benchmarking the parallel kernels.
#pragma once

#include <span>

#include "sparsect/core.hpp"

namespace sparsect {

/// Throws GeometryError if the grid does not fit inside the field of view
/// of `geometry` (for fan/cone, the bounding circle must stay inside sod).
void check_field_of_view(const BeamGeometry& geometry, Shape3 shape, Spacing3 spacing);

/// Line integrals (mm x value) of a square 2D slice, parallel or fan beam.
Sinogram forward_project_slice(const VoxelVolume& slice, const BeamGeometry& geometry,
                               std::span<const double> angles);

/// Cone-beam line integrals: views x det_rows x det_count.
Sinogram forward_project_cone(const VoxelVolume& volume, const BeamGeometry& geometry,
                              std::span<const double> angles);

/// Dispatches on geometry kind; slices for parallel/fan, volumes for cone.
Sinogram forward_project(const VoxelVolume& object, const BeamGeometry& geometry,
                         std::span<const double> angles);

/// Exact adjoint of forward_project onto a grid of the given shape.
VoxelVolume backproject(const Sinogram& sino, Shape3 shape, Spacing3 spacing);

namespace reference {

/// Serial ray-by-ray forward projection (same discretisation).
Sinogram forward_project(const VoxelVolume& object, const BeamGeometry& geometry,
                         std::span<const double> angles);

/// Serial scatter transpose: every ray deposits its interpolation weights.
VoxelVolume backproject(const Sinogram& sino, Shape3 shape, Spacing3 spacing);

}  // namespace reference

}  // namespace sparsect
