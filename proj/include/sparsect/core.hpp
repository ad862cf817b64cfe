// Shared domain types for the sparse-view CT toolkit.
//
// Coordinate conventions used throughout:
//   * Volumes are stored x-fastest: index = i + nx * (j + ny * k).
//   * Voxel centres sit at ((i - (nx-1)/2) * sx, (j - (ny-1)/2) * sy,
//     (k - (nz-1)/2) * sz) in mm, so the rotation axis passes through the
//     volume centre.
//   * A 2D image is a VoxelVolume with nz == 1.
//   * For a view angle theta, e_s = (cos, sin) is the detector axis and
//     e_r = (-sin, cos) the central ray direction. Fan/cone sources sit at
//     -sod * e_r; the flat detector centre at (sdd - sod) * e_r.
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sparsect {

/// Rejected input: preconditions violated by the caller.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Object does not fit the scan geometry.
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor container with a bad magic or unparseable header.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor container whose payload does not match its header.
struct CorruptionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A block set or prediction set is missing members.
struct IncompleteSetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

/// Clinical scanner distances (mm).
inline constexpr double kClinicalSod = 570.0;
inline constexpr double kClinicalSdd = 1040.0;

/// Number of views of a full scan.
inline constexpr int kFullViews = 2048;

enum class Unit { hu, attenuation, normalized, difference };

std::string_view to_string(Unit unit);
Unit unit_from_string(std::string_view name);

struct Shape3 {
  int nx = 1;
  int ny = 1;
  int nz = 1;

  [[nodiscard]] std::size_t voxels() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  bool operator==(const Shape3&) const = default;
};

struct Spacing3 {
  double sx = 1.0;
  double sy = 1.0;
  double sz = 1.0;
  bool operator==(const Spacing3&) const = default;
};

class VoxelVolume {
 public:
  VoxelVolume() = default;
  VoxelVolume(Shape3 shape, Spacing3 spacing, Unit unit, float fill = 0.0f);
  VoxelVolume(Shape3 shape, Spacing3 spacing, Unit unit,
              std::vector<float> values);

  [[nodiscard]] const Shape3& shape() const { return shape_; }
  [[nodiscard]] const Spacing3& spacing() const { return spacing_; }
  [[nodiscard]] Unit unit() const { return unit_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  [[nodiscard]] std::span<const float> values() const { return values_; }
  [[nodiscard]] std::span<float> values() { return values_; }
  [[nodiscard]] const std::vector<float>& data() const { return values_; }

  [[nodiscard]] std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(shape_.nx) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(shape_.ny) * static_cast<std::size_t>(k));
  }
  [[nodiscard]] float at(int i, int j, int k = 0) const { return values_[index(i, j, k)]; }
  float& at(int i, int j, int k = 0) { return values_[index(i, j, k)]; }

  /// Axial slice k as a 2D image (nz == 1).
  [[nodiscard]] VoxelVolume slice(int k) const;
  void set_slice(int k, const VoxelVolume& image);

  /// Same values under a different unit tag; validates the tag's range.
  [[nodiscard]] VoxelVolume retagged(Unit unit) const;

  [[nodiscard]] bool is_image() const { return shape_.nz == 1; }

  bool operator==(const VoxelVolume&) const = default;

 private:
  void validate() const;

  Shape3 shape_{};
  Spacing3 spacing_{};
  Unit unit_ = Unit::normalized;
  std::vector<float> values_ = std::vector<float>(1, 0.0f);
};

/// 2D image helper: an nx-by-ny slice with square pixels.
VoxelVolume make_image(int nx, int ny, double pitch, Unit unit, float fill = 0.0f);

/// Throws InvalidInput if the two volumes do not share a shape.
void require_same_shape(const VoxelVolume& a, const VoxelVolume& b, std::string_view what);

/// Dense row-major f32 tensor; image samples use channel-last layout
/// (rows, cols, channels).
struct Tensor {
  std::vector<int> shape;
  std::vector<float> values;

  Tensor() = default;
  Tensor(std::vector<int> shape, float fill = 0.0f);
  Tensor(std::vector<int> shape, std::vector<float> values);

  [[nodiscard]] std::size_t element_count() const;
  bool operator==(const Tensor&) const = default;
};

/// Volume as a [nz, ny, nx] tensor, and back.
Tensor to_tensor(const VoxelVolume& volume);
VoxelVolume volume_from_tensor(const Tensor& tensor, Spacing3 spacing, Unit unit);

enum class BeamKind { parallel, fan, cone };

std::string_view to_string(BeamKind kind);
BeamKind beam_kind_from_string(std::string_view name);

struct BeamGeometry {
  BeamKind kind = BeamKind::parallel;
  double sod = kClinicalSod;
  double sdd = kClinicalSdd;
  int det_count = 1;
  double det_spacing = 1.0;
  int det_rows = 1;
  double det_row_spacing = 1.0;
  double angular_range = kPi;

  /// sdd / sod for diverging beams, 1 for parallel.
  [[nodiscard]] double magnification() const;
  [[nodiscard]] int rows() const { return kind == BeamKind::cone ? det_rows : 1; }
  /// Throws InvalidInput when the invariants do not hold.
  void validate() const;

  bool operator==(const BeamGeometry&) const = default;
};

/// Geometry with the clinical source distances and the default angular
/// range (pi for parallel, 2 pi otherwise). Cone detectors default to a
/// square panel (det_rows = det_count rounded up to odd).
BeamGeometry make_clinical_geometry(BeamKind kind, int det_count, double det_spacing);

/// Detector count covering the in-plane diagonal of an n-voxel-wide grid,
/// rounded up to a multiple of 16 (736 for 512).
int default_det_count(int n);

/// Clinical geometry sized so the volume is never truncated.
BeamGeometry geometry_for_volume(BeamKind kind, Shape3 shape, Spacing3 spacing);

/// `count` evenly spaced angles over [0, angular_range), first angle 0.
std::vector<double> scan_angles(const BeamGeometry& geometry, int count);

struct Sinogram {
  BeamGeometry geometry;
  std::vector<double> angles;
  std::vector<float> values;  // [view][row][det]

  Sinogram() = default;
  Sinogram(BeamGeometry geometry, std::vector<double> angles);

  [[nodiscard]] int views() const { return static_cast<int>(angles.size()); }
  [[nodiscard]] int rows() const { return geometry.rows(); }
  [[nodiscard]] int det_count() const { return geometry.det_count; }
  [[nodiscard]] std::size_t index(int view, int row, int det) const {
    return (static_cast<std::size_t>(view) * static_cast<std::size_t>(rows()) +
            static_cast<std::size_t>(row)) *
               static_cast<std::size_t>(det_count()) +
           static_cast<std::size_t>(det);
  }
  [[nodiscard]] float at(int view, int row, int det) const { return values[index(view, row, det)]; }
  float& at(int view, int row, int det) { return values[index(view, row, det)]; }

  /// Throws InvalidInput if angles are not strictly increasing within the
  /// angular range or the value grid has the wrong size.
  void validate() const;
};

struct WindowSpec {
  double width = 2048.0;
  double level = 0.0;

  [[nodiscard]] double lower() const { return level - width / 2.0; }
  [[nodiscard]] double upper() const { return level + width / 2.0; }
  void validate() const;

  bool operator==(const WindowSpec&) const = default;
};

/// Parses "WIDTHxLEVEL", e.g. "2048x0" or "1700x-600".
WindowSpec parse_window(std::string_view text);
std::string format_window(const WindowSpec& window);

struct ViewSubset {
  int total_views = 0;
  int kept_views = 0;
  std::vector<int> indices;

  [[nodiscard]] int stride() const { return total_views / kept_views; }
};

/// Uniform-stride subset with phase 0. Throws InvalidInput unless `kept`
/// divides `total`.
ViewSubset make_view_subset(int total, int kept);

}  // namespace sparsect
