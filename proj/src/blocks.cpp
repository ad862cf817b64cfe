#include "sparsect/blocks.hpp"

#include <algorithm>

namespace sparsect {

BlockGrid plan_grid(Shape3 shape, int block_size, int margin) {
  if (shape.nx < 1 || shape.ny < 1 || shape.nz < 1)
    throw InvalidInput("plan_grid: shape components must be >= 1");
  if (margin < 0 || block_size <= 2 * margin)
    throw InvalidInput("plan_grid: block_size must exceed twice the margin");
  BlockGrid g;
  g.original = shape;
  g.block_size = block_size;
  g.margin = margin;
  g.core_size = block_size - 2 * margin;
  auto count = [&](int extent) { return (extent + g.core_size - 1) / g.core_size; };
  g.counts = {count(shape.nx), count(shape.ny), count(shape.nz)};
  auto padded = [&](int n) { return n * g.core_size + 2 * margin; };
  g.padded = {padded(g.counts[0]), padded(g.counts[1]), padded(g.counts[2])};
  return g;
}

namespace {

void require_grid_for(const VoxelVolume& volume, const BlockGrid& grid) {
  if (volume.shape() != grid.original)
    throw InvalidInput("block grid was planned for a different volume shape");
}

}  // namespace

Block extract_block(const VoxelVolume& volume, const BlockGrid& grid, std::array<int, 3> coords) {
  require_grid_for(volume, grid);
  for (int a = 0; a < 3; ++a)
    if (coords[a] < 0 || coords[a] >= grid.counts[a])
      throw InvalidInput("block coordinates outside the grid");
  const int n = grid.block_size;
  const Shape3& s = volume.shape();
  VoxelVolume out({n, n, n}, volume.spacing(), volume.unit());
  // Padded coordinate p maps to original p - margin.
  const int ox = coords[0] * grid.core_size - grid.margin;
  const int oy = coords[1] * grid.core_size - grid.margin;
  const int oz = coords[2] * grid.core_size - grid.margin;
  for (int k = 0; k < n; ++k) {
    const int z = oz + k;
    if (z < 0 || z >= s.nz) continue;
    for (int j = 0; j < n; ++j) {
      const int y = oy + j;
      if (y < 0 || y >= s.ny) continue;
      const int i_lo = std::max(0, -ox);
      const int i_hi = std::min(n, s.nx - ox);
      for (int i = i_lo; i < i_hi; ++i) out.at(i, j, k) = volume.at(ox + i, y, z);
    }
  }
  return {std::move(out), coords, {}, 0};
}

std::vector<Block> decompose(const VoxelVolume& volume, const BlockGrid& grid) {
  require_grid_for(volume, grid);
  std::vector<Block> blocks(grid.block_count());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const int i = static_cast<int>(b % grid.counts[0]);
    const int j = static_cast<int>((b / grid.counts[0]) % grid.counts[1]);
    const int k = static_cast<int>(b / (static_cast<std::size_t>(grid.counts[0]) * grid.counts[1]));
    blocks[b] = extract_block(volume, grid, {i, j, k});
  }
  return blocks;
}

VoxelVolume reassemble(std::span<const Block> blocks, const BlockGrid& grid) {
  if (blocks.empty()) throw IncompleteSetError("reassemble: no blocks given");
  std::vector<const Block*> slot(grid.block_count(), nullptr);
  const int n = grid.block_size;
  for (const Block& b : blocks) {
    for (int a = 0; a < 3; ++a)
      if (b.coords[a] < 0 || b.coords[a] >= grid.counts[a])
        throw InvalidInput("reassemble: block coordinates outside the grid");
    if (b.values.shape() != Shape3{n, n, n})
      throw InvalidInput("reassemble: block has the wrong size");
    const Block*& s = slot[grid.linear_index(b.coords)];
    if (s != nullptr) throw IncompleteSetError("reassemble: duplicate block");
    s = &b;
  }
  for (const Block* s : slot)
    if (s == nullptr) throw IncompleteSetError("reassemble: missing block");

  const Block& first = blocks.front();
  const Shape3& out_shape = grid.original;
  VoxelVolume out(out_shape, first.values.spacing(), first.values.unit());
  const int core = grid.core_size;
  const int m = grid.margin;
  // Core regions partition the output, so writes from different z are disjoint.
#pragma omp parallel for schedule(static)
  for (int z = 0; z < out_shape.nz; ++z) {
    const int bk = z / core;
    const int lk = z - bk * core + m;
    for (int y = 0; y < out_shape.ny; ++y) {
      const int bj = y / core;
      const int lj = y - bj * core + m;
      for (int x = 0; x < out_shape.nx; ++x) {
        const int bi = x / core;
        const Block& b = *slot[grid.linear_index({bi, bj, bk})];
        out.at(x, y, z) = b.values.at(x - bi * core + m, lj, lk);
      }
    }
  }
  return out;
}

std::string_view to_string(Plane plane) {
  switch (plane) {
    case Plane::axial: return "axial";
    case Plane::coronal: return "coronal";
    case Plane::sagittal: return "sagittal";
  }
  return "unknown";
}

Plane plane_from_string(std::string_view name) {
  if (name == "axial") return Plane::axial;
  if (name == "coronal") return Plane::coronal;
  if (name == "sagittal") return Plane::sagittal;
  throw InvalidInput("unknown plane '" + std::string(name) + "'");
}

namespace {

void copy_cut(const VoxelVolume& v, Plane plane, int c, float* out, int channels, int channel) {
  const Shape3& s = v.shape();
  switch (plane) {
    case Plane::axial:
      for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x)
          out[(static_cast<std::size_t>(y) * s.nx + x) * channels + channel] = v.at(x, y, c);
      break;
    case Plane::coronal:
      for (int z = 0; z < s.nz; ++z)
        for (int x = 0; x < s.nx; ++x)
          out[(static_cast<std::size_t>(z) * s.nx + x) * channels + channel] = v.at(x, c, z);
      break;
    case Plane::sagittal:
      for (int z = 0; z < s.nz; ++z)
        for (int y = 0; y < s.ny; ++y)
          out[(static_cast<std::size_t>(z) * s.ny + y) * channels + channel] = v.at(c, y, z);
      break;
  }
}

int cube_size(const Block& block) {
  const Shape3& s = block.values.shape();
  if (s.nx != s.ny || s.ny != s.nz) throw InvalidInput("block is not a cube");
  return s.nx;
}

}  // namespace

Tensor extract_directional_patch(const Block& block, Plane plane) {
  const int n = cube_size(block);
  Tensor out({n, n, 1});
  copy_cut(block.values, plane, center_index(n), out.values.data(), 1, 0);
  return out;
}

Tensor extract_25d(const Block& block) {
  const int n = cube_size(block);
  Tensor out({n, n, 3});
  const int c = center_index(n);
  copy_cut(block.values, Plane::axial, c, out.values.data(), 3, 0);
  copy_cut(block.values, Plane::coronal, c, out.values.data(), 3, 1);
  copy_cut(block.values, Plane::sagittal, c, out.values.data(), 3, 2);
  return out;
}

Tensor extract_2d3ch(const VoxelVolume& volume, int z) {
  const Shape3& s = volume.shape();
  if (z < 0 || z >= s.nz) throw InvalidInput("extract_2d3ch: slice index out of range");
  Tensor out({s.ny, s.nx, 3});
  const int planes[3] = {std::max(z - 1, 0), z, std::min(z + 1, s.nz - 1)};
  for (int ch = 0; ch < 3; ++ch)
    copy_cut(volume, Plane::axial, planes[ch], out.values.data(), 3, ch);
  return out;
}

Tensor extract_2d(const VoxelVolume& volume, int z) {
  const Shape3& s = volume.shape();
  if (z < 0 || z >= s.nz) throw InvalidInput("extract_2d: slice index out of range");
  Tensor out({s.ny, s.nx, 1});
  copy_cut(volume, Plane::axial, z, out.values.data(), 1, 0);
  return out;
}

}  // namespace sparsect
