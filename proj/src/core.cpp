#include "sparsect/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace sparsect {

std::string_view to_string(Unit unit) {
  switch (unit) {
    case Unit::hu: return "HU";
    case Unit::attenuation: return "attenuation";
    case Unit::normalized: return "normalized";
    case Unit::difference: return "difference";
  }
  return "unknown";
}

Unit unit_from_string(std::string_view name) {
  if (name == "HU") return Unit::hu;
  if (name == "attenuation") return Unit::attenuation;
  if (name == "normalized") return Unit::normalized;
  if (name == "difference") return Unit::difference;
  throw InvalidInput("unknown unit tag '" + std::string(name) + "'");
}

VoxelVolume::VoxelVolume(Shape3 shape, Spacing3 spacing, Unit unit, float fill)
    : shape_(shape), spacing_(spacing), unit_(unit) {
  if (shape.nx < 1 || shape.ny < 1 || shape.nz < 1)
    throw InvalidInput("volume shape components must be >= 1");
  values_.assign(shape.voxels(), fill);
  validate();
}

VoxelVolume::VoxelVolume(Shape3 shape, Spacing3 spacing, Unit unit,
                         std::vector<float> values)
    : shape_(shape), spacing_(spacing), unit_(unit), values_(std::move(values)) {
  if (shape.nx < 1 || shape.ny < 1 || shape.nz < 1)
    throw InvalidInput("volume shape components must be >= 1");
  if (values_.size() != shape.voxels())
    throw InvalidInput("volume value count does not match its shape");
  validate();
}

void VoxelVolume::validate() const {
  if (!(spacing_.sx > 0.0 && spacing_.sy > 0.0 && spacing_.sz > 0.0))
    throw InvalidInput("voxel spacing must be positive");
  if (unit_ == Unit::normalized) {
    for (float v : values_)
      if (!(v >= 0.0f && v <= 1.0f))
        throw InvalidInput("normalized volume holds a value outside [0, 1]");
  }
}

VoxelVolume VoxelVolume::slice(int k) const {
  if (k < 0 || k >= shape_.nz) throw InvalidInput("slice index out of range");
  const std::size_t plane = static_cast<std::size_t>(shape_.nx) * shape_.ny;
  std::vector<float> out(values_.begin() + static_cast<std::ptrdiff_t>(plane * k),
                         values_.begin() + static_cast<std::ptrdiff_t>(plane * (k + 1)));
  return {{shape_.nx, shape_.ny, 1}, spacing_, unit_, std::move(out)};
}

void VoxelVolume::set_slice(int k, const VoxelVolume& image) {
  if (k < 0 || k >= shape_.nz) throw InvalidInput("slice index out of range");
  if (image.shape() != Shape3{shape_.nx, shape_.ny, 1})
    throw InvalidInput("slice shape does not match the volume");
  if (image.unit() != unit_) throw InvalidInput("slice unit does not match the volume");
  const std::size_t plane = static_cast<std::size_t>(shape_.nx) * shape_.ny;
  std::copy(image.data().begin(), image.data().end(),
            values_.begin() + static_cast<std::ptrdiff_t>(plane * k));
}

VoxelVolume VoxelVolume::retagged(Unit unit) const {
  return {shape_, spacing_, unit, values_};
}

VoxelVolume make_image(int nx, int ny, double pitch, Unit unit, float fill) {
  return {{nx, ny, 1}, {pitch, pitch, pitch}, unit, fill};
}

void require_same_shape(const VoxelVolume& a, const VoxelVolume& b, std::string_view what) {
  if (a.shape() != b.shape())
    throw InvalidInput(std::string(what) + ": shape mismatch");
}

namespace {
std::size_t product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 1) throw InvalidInput("tensor dimensions must be >= 1");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> s, float fill) : shape(std::move(s)) {
  if (shape.empty()) throw InvalidInput("tensor shape must be nonempty");
  values.assign(product(shape), fill);
}

Tensor::Tensor(std::vector<int> s, std::vector<float> v) : shape(std::move(s)), values(std::move(v)) {
  if (shape.empty()) throw InvalidInput("tensor shape must be nonempty");
  if (values.size() != product(shape)) throw InvalidInput("tensor value count does not match its shape");
}

std::size_t Tensor::element_count() const { return product(shape); }

Tensor to_tensor(const VoxelVolume& volume) {
  const Shape3& s = volume.shape();
  return {{s.nz, s.ny, s.nx}, volume.data()};
}

VoxelVolume volume_from_tensor(const Tensor& tensor, Spacing3 spacing, Unit unit) {
  std::vector<int> dims = tensor.shape;
  // A trailing singleton channel axis is dropped: [ny, nx, 1] is an image,
  // [nz, ny, nx, 1] a volume.
  if (dims.size() >= 3 && dims.back() == 1) dims.pop_back();
  if (dims.size() == 2) return {{dims[1], dims[0], 1}, spacing, unit, tensor.values};
  if (dims.size() == 3) return {{dims[2], dims[1], dims[0]}, spacing, unit, tensor.values};
  throw InvalidInput("tensor is not a 2D or 3D scalar grid");
}

std::string_view to_string(BeamKind kind) {
  switch (kind) {
    case BeamKind::parallel: return "parallel";
    case BeamKind::fan: return "fan";
    case BeamKind::cone: return "cone";
  }
  return "unknown";
}

BeamKind beam_kind_from_string(std::string_view name) {
  if (name == "parallel") return BeamKind::parallel;
  if (name == "fan") return BeamKind::fan;
  if (name == "cone") return BeamKind::cone;
  throw InvalidInput("unknown beam geometry '" + std::string(name) + "'");
}

double BeamGeometry::magnification() const {
  return kind == BeamKind::parallel ? 1.0 : sdd / sod;
}

void BeamGeometry::validate() const {
  if (kind != BeamKind::parallel && kind != BeamKind::fan && kind != BeamKind::cone)
    throw InvalidInput("invalid beam kind");
  if (det_count < 1) throw InvalidInput("det_count must be >= 1");
  if (!(det_spacing > 0.0)) throw InvalidInput("det_spacing must be positive");
  if (!(angular_range > 0.0)) throw InvalidInput("angular_range must be positive");
  if (kind != BeamKind::parallel && !(sod > 0.0 && sod < sdd))
    throw InvalidInput("diverging beams need 0 < sod < sdd");
  if (kind == BeamKind::cone) {
    if (det_rows < 1) throw InvalidInput("det_rows must be >= 1");
    if (!(det_row_spacing > 0.0)) throw InvalidInput("det_row_spacing must be positive");
  }
}

BeamGeometry make_clinical_geometry(BeamKind kind, int det_count, double det_spacing) {
  BeamGeometry g;
  g.kind = kind;
  g.det_count = det_count;
  g.det_spacing = det_spacing;
  g.sod = kClinicalSod;
  g.sdd = kClinicalSdd;
  g.angular_range = kind == BeamKind::parallel ? kPi : 2.0 * kPi;
  if (kind == BeamKind::cone) {
    g.det_rows = det_count % 2 == 0 ? det_count + 1 : det_count;
    g.det_row_spacing = det_spacing;
  } else {
    g.det_rows = 1;
    g.det_row_spacing = det_spacing;
  }
  g.validate();
  return g;
}

int default_det_count(int n) {
  const double diagonal = n * std::sqrt(2.0);
  return static_cast<int>(std::ceil(diagonal / 16.0)) * 16;
}

BeamGeometry geometry_for_volume(BeamKind kind, Shape3 shape, Spacing3 spacing) {
  const int n = std::max(shape.nx, shape.ny);
  const double pitch = std::max(spacing.sx, spacing.sy);
  BeamGeometry g = make_clinical_geometry(kind, default_det_count(n), pitch);
  g.det_spacing = pitch * g.magnification();
  if (kind == BeamKind::cone) {
    // Rows cover the full volume height as seen from the near-source edge.
    const double radius = 0.5 * std::hypot(shape.nx * spacing.sx, shape.ny * spacing.sy);
    const double half_height = 0.5 * shape.nz * spacing.sz;
    const double v_max = half_height * g.sdd / (g.sod - radius);
    g.det_row_spacing = spacing.sz * g.magnification();
    g.det_rows = 2 * static_cast<int>(std::ceil(v_max / g.det_row_spacing)) + 1;
  } else {
    g.det_row_spacing = g.det_spacing;
  }
  g.validate();
  return g;
}

std::vector<double> scan_angles(const BeamGeometry& geometry, int count) {
  if (count < 1) throw InvalidInput("view count must be >= 1");
  std::vector<double> angles(static_cast<std::size_t>(count));
  for (int v = 0; v < count; ++v) angles[v] = geometry.angular_range * v / count;
  return angles;
}

Sinogram::Sinogram(BeamGeometry g, std::vector<double> a)
    : geometry(g), angles(std::move(a)) {
  geometry.validate();
  values.assign(static_cast<std::size_t>(views()) * rows() * det_count(), 0.0f);
  validate();
}

void Sinogram::validate() const {
  geometry.validate();
  if (values.size() != static_cast<std::size_t>(views()) * rows() * det_count())
    throw InvalidInput("sinogram value count does not match views x rows x detectors");
  for (std::size_t v = 0; v < angles.size(); ++v) {
    if (angles[v] < 0.0 || angles[v] >= geometry.angular_range + 1e-12)
      throw InvalidInput("sinogram angle outside the angular range");
    if (v > 0 && !(angles[v] > angles[v - 1]))
      throw InvalidInput("sinogram angles must be strictly increasing");
  }
}

void WindowSpec::validate() const {
  if (!(width > 0.0)) throw InvalidInput("window width must be positive");
}

WindowSpec parse_window(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) throw InvalidInput("window must look like WIDTHxLEVEL");
  auto parse = [](std::string_view part) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size())
      throw InvalidInput("cannot parse window component '" + std::string(part) + "'");
    return value;
  };
  WindowSpec w{parse(text.substr(0, x)), parse(text.substr(x + 1))};
  w.validate();
  return w;
}

std::string format_window(const WindowSpec& window) {
  std::ostringstream os;
  os << window.width << "x" << window.level;
  return os.str();
}

ViewSubset make_view_subset(int total, int kept) {
  if (total < 1 || kept < 1 || kept > total || total % kept != 0)
    throw InvalidInput("kept views must divide the total view count");
  ViewSubset subset{total, kept, {}};
  subset.indices.reserve(static_cast<std::size_t>(kept));
  for (int i = 0; i < kept; ++i) subset.indices.push_back(i * subset.stride());
  return subset;
}

}  // namespace sparsect
