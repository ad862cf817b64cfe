// Tensor container files and the dataset manifest. The byte layout and the
// manifest schema are described in docs/format.md.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsect/core.hpp"

namespace sparsect {

inline constexpr char kTensorMagic[8] = {'S', 'P', 'C', 'T', '0', '0', '0', '1'};

struct TensorMetadata {
  std::string unit = "normalized";
  nlohmann::json provenance = nlohmann::json::object();
};

struct TensorFile {
  Tensor tensor;
  TensorMetadata metadata;
};

/// Header only; the payload is not read but its length is checked.
struct TensorHeader {
  std::vector<int> shape;
  TensorMetadata metadata;
};

void write_tensor(const std::filesystem::path& path, const Tensor& tensor,
                  const TensorMetadata& metadata = {});
TensorFile read_tensor(const std::filesystem::path& path);
TensorHeader read_tensor_header(const std::filesystem::path& path);

/// Container bytes without touching the filesystem.
std::string encode_tensor(const Tensor& tensor, const TensorMetadata& metadata = {});
TensorFile decode_tensor(std::string_view bytes);

/// Volumes persist as [nz, ny, nx] tensors; spacing travels in provenance.
void write_volume(const std::filesystem::path& path, const VoxelVolume& volume,
                  nlohmann::json provenance = nlohmann::json::object());
VoxelVolume read_volume(const std::filesystem::path& path);

enum class Split { train, validation, test };

std::string_view to_string(Split split);
Split split_from_string(std::string_view name);

struct SubjectEntry {
  std::string id;
  std::optional<Split> split;
};

struct FileRef {
  std::string path;  // relative to the manifest directory
  std::vector<int> shape;
  std::string role;
};

struct CaseEntry {
  std::string subject;
  BeamKind geometry = BeamKind::parallel;
  WindowSpec window;
  Shape3 shape{};
  Spacing3 spacing{};
  int full_views = kFullViews;
  FileRef full;
  std::map<int, FileRef> sparse;
  std::map<int, FileRef> residual;
};

struct SampleEntry {
  std::string id;
  std::string subject;
  BeamKind geometry = BeamKind::parallel;
  int views = 0;
  std::string mode;
  FileRef input;
  FileRef target;
  int slice = -1;                      // slice modes
  std::array<int, 3> block{-1, -1, -1};  // block modes
};

struct BlockSettings {
  int block_size = 64;
  int margin = 8;
  bool operator==(const BlockSettings&) const = default;
};

struct DatasetManifest {
  int version = 1;
  std::optional<std::uint64_t> split_seed;
  BlockSettings blocks;
  std::vector<SubjectEntry> subjects;
  std::vector<CaseEntry> cases;
  std::vector<SampleEntry> samples;

  [[nodiscard]] const SubjectEntry* subject(const std::string& id) const;
  [[nodiscard]] const CaseEntry* find_case(const std::string& subject, BeamKind geometry) const;
  /// Adds the subject if new and replaces any case with the same key.
  void upsert_case(CaseEntry entry);
  /// Drops every sample of `mode`, then appends `samples`.
  void replace_samples(const std::string& mode, std::vector<SampleEntry> samples);
};

nlohmann::json to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& doc);

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Shuffles the subjects with `seed` and assigns floor(0.4 n) to test,
/// max(1, round(0.1 n)) to validation and the rest to train.
/// 22 subjects give 12/2/8. Throws InvalidInput below 3 subjects.
std::map<std::string, Split> assign_splits(const std::vector<std::string>& subject_ids,
                                           std::uint64_t seed);

/// Split counts (train, validation, test) produced for n subjects.
std::array<int, 3> split_counts(int n);

/// Equal rank and equal extents on every axis but the trailing channel.
bool same_spatial_shape(const std::vector<int>& a, const std::vector<int>& b);

/// Referential integrity: every file exists, header shapes match, every
/// target matches its input's spatial shape, no subject appears twice. Returns the
/// list of problems (empty when consistent).
std::vector<std::string> verify_manifest(const DatasetManifest& manifest,
                                         const std::filesystem::path& root);

}  // namespace sparsect
