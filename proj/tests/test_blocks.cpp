#include <doctest.h>

#include "sparsect/blocks.hpp"
#include "support.hpp"

using namespace sparsect;

namespace {

// Every voxel carries its own coordinates, so any cut can be checked
// against the closed form. Outside the volume the padding reads 0.
float code(int x, int y, int z, Shape3 s) {
  if (x < 0 || y < 0 || z < 0 || x >= s.nx || y >= s.ny || z >= s.nz) return 0.0f;
  return static_cast<float>(1 + x + 100 * y + 10000 * z);
}

VoxelVolume coded_volume(Shape3 s) {
  VoxelVolume v(s, {}, Unit::difference);
  for (int z = 0; z < s.nz; ++z)
    for (int y = 0; y < s.ny; ++y)
      for (int x = 0; x < s.nx; ++x) v.at(x, y, z) = code(x, y, z, s);
  return v;
}

float tensor_at(const Tensor& t, int r, int c, int ch) {
  return t.values[(static_cast<std::size_t>(r) * t.shape[1] + c) * t.shape[2] + ch];
}

}  // namespace

TEST_CASE("grid planning") {
  const BlockGrid g = plan_grid({512, 512, 512});
  CHECK(g.core_size == 48);
  CHECK(g.counts == std::array<int, 3>{11, 11, 11});
  CHECK(g.padded == Shape3{544, 544, 544});
  CHECK(g.block_count() == 1331);

  const BlockGrid small = plan_grid({49, 10, 96}, 64, 8);
  CHECK(small.counts == std::array<int, 3>{2, 1, 2});
  CHECK(small.padded == Shape3{112, 64, 112});

  const BlockGrid big = plan_grid({100, 100, 100}, 128, 8);
  CHECK(big.core_size == 112);
  CHECK(big.counts == std::array<int, 3>{1, 1, 1});

  CHECK_THROWS_AS(plan_grid({10, 10, 10}, 16, 8), InvalidInput);
  CHECK_THROWS_AS(plan_grid({0, 10, 10}), InvalidInput);
}

TEST_CASE("blocks hold the zero-padded volume") {
  const Shape3 s{49, 30, 20};
  const VoxelVolume v = coded_volume(s);
  const BlockGrid g = plan_grid(s, 32, 4);
  const Block b = extract_block(v, g, {1, 0, 0});
  const int ox = 1 * g.core_size - g.margin, oy = -g.margin, oz = -g.margin;
  for (int k = 0; k < 32; k += 3)
    for (int j = 0; j < 32; j += 2)
      for (int i = 0; i < 32; ++i) CHECK(b.values.at(i, j, k) == code(ox + i, oy + j, oz + k, s));
  CHECK_THROWS_AS(extract_block(v, g, {3, 0, 0}), InvalidInput);
}

TEST_CASE("decompose and reassemble round trip") {
  for (auto [shape, size, margin] :
       std::vector<std::tuple<Shape3, int, int>>{{{49, 49, 49}, 64, 8},
                                                 {{49, 49, 49}, 16, 3},
                                                 {{70, 33, 17}, 24, 4},
                                                 {{40, 40, 40}, 128, 8}}) {
    CAPTURE(size);
    const auto v = testing_support::random_volume(shape, 11, Unit::normalized);
    const BlockGrid g = plan_grid(shape, size, margin);
    const auto blocks = decompose(v, g);
    CHECK(blocks.size() == g.block_count());
    CHECK(reassemble(blocks, g) == v);
  }
}

TEST_CASE("reassembly keeps only the block cores") {
  const Shape3 s{40, 40, 40};
  const BlockGrid g = plan_grid(s, 32, 8);
  auto blocks = decompose(coded_volume(s), g);
  // Garbage in every margin must not leak into the result.
  for (Block& b : blocks)
    for (int k = 0; k < 32; ++k)
      for (int j = 0; j < 32; ++j)
        for (int i = 0; i < 32; ++i) {
          const bool core = i >= 8 && i < 24 && j >= 8 && j < 24 && k >= 8 && k < 24;
          if (!core) b.values.at(i, j, k) = -1.0f;
        }
  CHECK(reassemble(blocks, g) == coded_volume(s));
}

TEST_CASE("missing or duplicated blocks are rejected") {
  const Shape3 s{30, 30, 30};
  const BlockGrid g = plan_grid(s, 16, 2);
  auto blocks = decompose(testing_support::random_volume(s, 2), g);
  auto missing = blocks;
  missing.pop_back();
  CHECK_THROWS_AS(reassemble(missing, g), IncompleteSetError);
  auto duplicated = blocks;
  duplicated.back() = duplicated.front();
  CHECK_THROWS_AS(reassemble(duplicated, g), IncompleteSetError);
}

TEST_CASE("directional patches are the central cuts") {
  const Shape3 s{50, 50, 50};
  const BlockGrid g = plan_grid(s, 32, 8);
  const Block b = extract_block(coded_volume(s), g, {1, 2, 0});
  const int n = 32, c = center_index(n);
  CHECK(c == 16);
  const int ox = 1 * g.core_size - 8, oy = 2 * g.core_size - 8, oz = -8;
  const Tensor axial = extract_directional_patch(b, Plane::axial);
  const Tensor coronal = extract_directional_patch(b, Plane::coronal);
  const Tensor sagittal = extract_directional_patch(b, Plane::sagittal);
  const Tensor stack = extract_25d(b);
  CHECK(axial.shape == std::vector<int>{n, n, 1});
  CHECK(stack.shape == std::vector<int>{n, n, 3});
  for (int r = 0; r < n; ++r)
    for (int q = 0; q < n; ++q) {
      const float ax = code(ox + q, oy + r, oz + c, s);
      const float co = code(ox + q, oy + c, oz + r, s);
      const float sa = code(ox + c, oy + q, oz + r, s);
      CHECK(tensor_at(axial, r, q, 0) == ax);
      CHECK(tensor_at(coronal, r, q, 0) == co);
      CHECK(tensor_at(sagittal, r, q, 0) == sa);
      CHECK(tensor_at(stack, r, q, 0) == ax);
      CHECK(tensor_at(stack, r, q, 1) == co);
      CHECK(tensor_at(stack, r, q, 2) == sa);
    }
  for (Plane p : {Plane::axial, Plane::coronal, Plane::sagittal})
    CHECK(plane_from_string(to_string(p)) == p);
  CHECK_THROWS_AS(plane_from_string("oblique"), InvalidInput);
}

TEST_CASE("2D and three-slice stacks") {
  const Shape3 s{6, 5, 4};
  const VoxelVolume v = coded_volume(s);
  const Tensor t = extract_2d(v, 2);
  CHECK(t.shape == std::vector<int>{5, 6, 1});
  CHECK(tensor_at(t, 3, 4, 0) == code(4, 3, 2, s));
  for (int z = 0; z < 4; ++z) {
    const Tensor st = extract_2d3ch(v, z);
    CHECK(st.shape == std::vector<int>{5, 6, 3});
    for (int ch = 0; ch < 3; ++ch) {
      const int src = std::clamp(z + ch - 1, 0, 3);  // edges replicate
      CHECK(tensor_at(st, 1, 2, ch) == code(2, 1, src, s));
    }
  }
  CHECK_THROWS_AS(extract_2d(v, 4), InvalidInput);
  CHECK_THROWS_AS(extract_2d3ch(v, -1), InvalidInput);
}
