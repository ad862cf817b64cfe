// Synthetic ellipsoid phantoms in Hounsfield units.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sparsect/core.hpp"

namespace sparsect {

inline constexpr float kAirHu = -1000.0f;

struct EllipsoidSpec {
  std::array<double, 3> center{};     // mm
  std::array<double, 3> semi_axes{};  // mm
  double rotation = 0.0;              // radians, about z
  double value = 0.0;                 // HU, added inside the ellipsoid

  [[nodiscard]] bool contains(double x, double y, double z) const;
  void validate() const;
};

/// Air background plus the additive superposition of `specs`. Each voxel
/// is sampled on a supersample^3 sub-grid and averaged.
VoxelVolume generate_phantom(Shape3 shape, Spacing3 spacing,
                             const std::vector<EllipsoidSpec>& specs, int supersample = 1);

/// Thorax-like layout (body, lungs, spine, vessels, nodules) scaled to the
/// grid extent. Nodule placement and size are drawn from `seed`. With
/// `z_homogeneous`, every structure spans the full volume height.
std::vector<EllipsoidSpec> thorax_specs(Shape3 shape, Spacing3 spacing, std::uint64_t seed,
                                        bool z_homogeneous = false);

std::vector<EllipsoidSpec> load_phantom_specs(const std::string& path);
void save_phantom_specs(const std::string& path, const std::vector<EllipsoidSpec>& specs);

}  // namespace sparsect
