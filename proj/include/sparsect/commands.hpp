// Pipeline commands behind the `sparsect` executable. Each command reads
// and writes files under a dataset directory holding manifest.json.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparsect/blocks.hpp"
#include "sparsect/dataset_io.hpp"
#include "sparsect/metrics.hpp"
#include "sparsect/recon.hpp"

namespace sparsect {

namespace fs = std::filesystem;

inline constexpr const char* kManifestName = "manifest.json";

/// Sample layouts understood by extract, stub-predictions and score.
inline const std::vector<std::string> kSampleModes = {
    "2d", "2d3ch", "25d", "3d", "patch-axial", "patch-coronal", "patch-sagittal"};

void validate_mode(const std::string& mode);
bool is_block_mode(const std::string& mode);

struct PhantomConfig {
  std::string subject = "S00";
  int size = 64;       // nx = ny
  int slices = 0;      // nz; 0 means `size`
  double pitch = 1.0;  // mm, all axes
  std::uint64_t seed = 1;
  int supersample = 2;
  std::string specs_path;  // optional JSON ellipsoid list; overrides the thorax layout
  fs::path out;
};

/// Writes <out>/phantoms/<subject>.spct (HU) and the ellipsoid list next to
/// it. Returns the volume path.
fs::path cmd_phantom(const PhantomConfig& config);

struct SimulateConfig {
  fs::path input;  // HU volume container
  std::string subject = "S00";
  BeamKind geometry = BeamKind::parallel;
  std::vector<int> views = kSparseLevels;
  int full_views = kFullViews;
  WindowSpec window{};
  FilterSpec filter{};
  fs::path out;
};

/// Persists full, sparse and residual volumes for one case, writes a
/// summary.tsv of sparse-vs-full scores and updates the manifest.
CaseEntry cmd_simulate(const SimulateConfig& config);

struct SplitConfig {
  fs::path dataset;
  std::uint64_t seed = 0;
};

/// Assigns every manifest subject to train/validation/test.
std::map<std::string, Split> cmd_split(const SplitConfig& config);

struct ExtractConfig {
  fs::path dataset;
  std::string mode = "2d";
  int block_size = 64;
  int margin = 8;
};

/// Writes input/target sample pairs for every case and sparse level.
/// Targets are artifact tensors (sparse - full) with the input's spatial
/// shape; 2d3ch pairs its three slices with the central slice's target.
/// Returns the number of samples written.
std::size_t cmd_extract(const ExtractConfig& config);

enum class StubKind { zero, oracle };

struct StubConfig {
  fs::path dataset;
  std::string mode = "2d";
  StubKind kind = StubKind::zero;
  std::optional<Split> split = Split::test;  // nullopt: every subject
  fs::path out;
};

/// Stand-in predictions named <out>/<sample id>.spct: zeros, or copies of
/// the targets.
std::size_t cmd_stub_predictions(const StubConfig& config);

struct ScoreConfig {
  fs::path dataset;
  std::string mode = "2d";
  fs::path predictions;
  std::optional<Split> split = Split::test;
  fs::path out;
  bool images = true;
  SsimParams ssim{};
};

/// Applies predictions and scores sparse and corrected data against the
/// full-view reference. Slice and block modes are scored on reassembled
/// volumes, cut modes per patch. Writes scores_long.tsv,
/// scores_table.tsv, scores.json and graymap images. Read-only on the
/// dataset tree. Throws IncompleteSetError when a prediction is missing.
std::vector<CaseScores> cmd_score(const ScoreConfig& config);

/// 8-bit binary graymap of a 2D image, mapping [lo, hi] to [0, 255].
void write_pgm(const fs::path& path, const VoxelVolume& image, double lo, double hi);

}  // namespace sparsect
