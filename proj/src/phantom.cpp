#include "sparsect/phantom.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

namespace sparsect {

bool EllipsoidSpec::contains(double x, double y, double z) const {
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  const double dx = x - center[0];
  const double dy = y - center[1];
  const double dz = z - center[2];
  const double lx = (c * dx + s * dy) / semi_axes[0];
  const double ly = (-s * dx + c * dy) / semi_axes[1];
  const double lz = dz / semi_axes[2];
  return lx * lx + ly * ly + lz * lz <= 1.0;
}

void EllipsoidSpec::validate() const {
  for (double a : semi_axes)
    if (!(a > 0.0)) throw InvalidInput("ellipsoid semi-axes must be positive");
}

VoxelVolume generate_phantom(Shape3 shape, Spacing3 spacing,
                             const std::vector<EllipsoidSpec>& specs, int supersample) {
  if (specs.empty()) throw InvalidInput("phantom needs at least one ellipsoid");
  if (supersample < 1) throw InvalidInput("supersample must be >= 1");
  for (const auto& e : specs) e.validate();

  VoxelVolume out(shape, spacing, Unit::hu, kAirHu);
  float* f = out.values().data();
  const double cx = 0.5 * (shape.nx - 1);
  const double cy = 0.5 * (shape.ny - 1);
  const double cz = 0.5 * (shape.nz - 1);
  const int n = supersample;
  const double inv_samples = 1.0 / (n * n * n);

#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < shape.nz; ++k) {
    for (int j = 0; j < shape.ny; ++j) {
      for (int i = 0; i < shape.nx; ++i) {
        double acc = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
              const double x = (i - cx + (c + 0.5) / n - 0.5) * spacing.sx;
              const double y = (j - cy + (b + 0.5) / n - 0.5) * spacing.sy;
              const double z = (k - cz + (a + 0.5) / n - 0.5) * spacing.sz;
              for (const auto& e : specs)
                if (e.contains(x, y, z)) acc += e.value;
            }
        f[out.index(i, j, k)] = static_cast<float>(kAirHu + acc * inv_samples);
      }
    }
  }
  return out;
}

std::vector<EllipsoidSpec> thorax_specs(Shape3 shape, Spacing3 spacing, std::uint64_t seed,
                                        bool z_homogeneous) {
  const double ex = 0.5 * shape.nx * spacing.sx;
  const double ey = 0.5 * shape.ny * spacing.sy;
  const double ez = 0.5 * shape.nz * spacing.sz;
  const double tall = z_homogeneous ? 1e9 : 1.5 * ez;
  auto zaxis = [&](double fraction) { return z_homogeneous ? 1e9 : fraction * ez; };

  std::vector<EllipsoidSpec> specs;
  specs.push_back({{0, 0, 0}, {0.80 * ex, 0.62 * ey, tall}, 0.0, 1000.0});          // body
  specs.push_back({{-0.38 * ex, 0.02 * ey, 0}, {0.26 * ex, 0.42 * ey, zaxis(0.8)},  // lungs
                   0.15, -850.0});
  specs.push_back({{0.38 * ex, 0.02 * ey, 0}, {0.26 * ex, 0.42 * ey, zaxis(0.8)}, -0.15,
                   -850.0});
  specs.push_back({{0.0, -0.45 * ey, 0}, {0.09 * ex, 0.09 * ey, tall}, 0.0, 700.0});  // spine
  specs.push_back({{0.05 * ex, 0.12 * ey, 0.05 * ez}, {0.17 * ex, 0.16 * ey, zaxis(0.6)},
                   0.4, 40.0});  // mediastinum
  specs.push_back({{0.0, 0.50 * ey, 0}, {0.05 * ex, 0.03 * ey, zaxis(0.9)}, 0.0,
                   700.0});  // sternum

  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const int nodules = 3 + static_cast<int>(rng() % 3);
  for (int n = 0; n < nodules; ++n) {
    const double side = (rng() & 1) ? 1.0 : -1.0;
    const double radius = (0.03 + 0.03 * uniform()) * ex;
    const double x = side * 0.38 * ex + (uniform() - 0.5) * 0.25 * ex;
    const double y = 0.02 * ey + (uniform() - 0.5) * 0.45 * ey;
    const double z = z_homogeneous ? 0.0 : (uniform() - 0.5) * 0.8 * ez;
    specs.push_back({{x, y, z}, {radius, radius, z_homogeneous ? 1e9 : radius}, 0.0, 800.0});
  }
  return specs;
}

std::vector<EllipsoidSpec> load_phantom_specs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open phantom spec file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  std::vector<EllipsoidSpec> specs;
  try {
    const auto& list = doc.is_object() ? doc.at("ellipsoids") : doc;
    for (const auto& item : list) {
      EllipsoidSpec e;
      e.center = item.at("center").get<std::array<double, 3>>();
      e.semi_axes = item.at("semi_axes").get<std::array<double, 3>>();
      e.rotation = item.value("rotation", 0.0);
      e.value = item.at("value").get<double>();
      e.validate();
      specs.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  return specs;
}

void save_phantom_specs(const std::string& path, const std::vector<EllipsoidSpec>& specs) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : specs)
    list.push_back({{"center", e.center},
                    {"semi_axes", e.semi_axes},
                    {"rotation", e.rotation},
                    {"value", e.value}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot write phantom spec file " + path);
  out << nlohmann::json{{"ellipsoids", list}}.dump(2) << '\n';
}

}  // namespace sparsect
