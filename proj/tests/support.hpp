// Helpers shared by the test binaries.
#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "sparsect/core.hpp"

namespace testing_support {

inline sparsect::VoxelVolume random_volume(sparsect::Shape3 shape, std::uint64_t seed,
                                           sparsect::Unit unit = sparsect::Unit::attenuation,
                                           double lo = 0.0, double hi = 1.0,
                                           sparsect::Spacing3 spacing = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  sparsect::VoxelVolume v(shape, spacing, unit);
  for (float& x : v.values()) x = static_cast<float>(u(rng));
  return v;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sparsect-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
