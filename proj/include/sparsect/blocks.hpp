// Dimensionality pipeline: overlapping cubic blocks, 2.5D orthogonal cuts,
// neighbouring-slice stacks and directional patches.
//
// A volume is zero-padded so that it sits at offset `margin` on every axis
// and each axis holds `count * core + 2 * margin` voxels. Block (i, j, k)
// starts at padded coordinate (i, j, k) * core and spans block_size
// voxels; its central core^3 region owns the output voxels on reassembly.
#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sparsect/core.hpp"

namespace sparsect {

struct BlockGrid {
  Shape3 original{};
  int block_size = 64;
  int core_size = 48;
  int margin = 8;
  Shape3 padded{};
  std::array<int, 3> counts{};  // blocks along x, y, z

  [[nodiscard]] std::size_t block_count() const {
    return static_cast<std::size_t>(counts[0]) * counts[1] * counts[2];
  }
  [[nodiscard]] std::size_t linear_index(const std::array<int, 3>& coords) const {
    return static_cast<std::size_t>(coords[0]) +
           static_cast<std::size_t>(counts[0]) *
               (static_cast<std::size_t>(coords[1]) + static_cast<std::size_t>(counts[1]) * coords[2]);
  }
  bool operator==(const BlockGrid&) const = default;
};

BlockGrid plan_grid(Shape3 shape, int block_size = 64, int margin = 8);

struct Block {
  VoxelVolume values;            // block_size^3
  std::array<int, 3> coords{};   // (i, j, k) block indices
  std::string case_id;
  int views = 0;
};

/// Block (i, j, k) of the zero-padded volume.
Block extract_block(const VoxelVolume& volume, const BlockGrid& grid, std::array<int, 3> coords);

/// Every block of the grid, x-fastest order.
std::vector<Block> decompose(const VoxelVolume& volume, const BlockGrid& grid);

/// Crop-to-core stitching back to the original shape. Throws
/// IncompleteSetError when a block is missing or duplicated.
VoxelVolume reassemble(std::span<const Block> blocks, const BlockGrid& grid);

enum class Plane { axial, coronal, sagittal };

std::string_view to_string(Plane plane);
Plane plane_from_string(std::string_view name);

/// Index of the central cut of an n-voxel block: n / 2.
inline int center_index(int n) { return n / 2; }

/// Central cut of a block: axial [y][x] at z = c, coronal [z][x] at y = c,
/// sagittal [z][y] at x = c. Shape (n, n, 1).
Tensor extract_directional_patch(const Block& block, Plane plane);

/// The three central cuts as channels 0/1/2 = axial/coronal/sagittal.
/// Shape (n, n, 3).
Tensor extract_25d(const Block& block);

/// Slices z-1, z, z+1 as channels, edge slices replicated. Shape
/// (ny, nx, 3).
Tensor extract_2d3ch(const VoxelVolume& volume, int z);

/// Axial slice z as (ny, nx, 1).
Tensor extract_2d(const VoxelVolume& volume, int z);

}  // namespace sparsect
