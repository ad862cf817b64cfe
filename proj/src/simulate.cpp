#include "sparsect/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "sparsect/projector.hpp"

namespace sparsect {

namespace {

constexpr double kLattice = 16777216.0;  // 2^24

void require_unit(const VoxelVolume& v, Unit unit, std::string_view what) {
  if (v.unit() != unit)
    throw InvalidInput(std::string(what) + ": expected a " + std::string(to_string(unit)) +
                       " volume, got " + std::string(to_string(v.unit())));
}

VoxelVolume difference(const VoxelVolume& a, const VoxelVolume& b) {
  std::vector<float> out(a.size());
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = av[n] - bv[n];
  return {a.shape(), a.spacing(), Unit::difference, std::move(out)};
}

}  // namespace

Sinogram subsample_views(const Sinogram& sino, int kept) {
  sino.validate();
  const ViewSubset subset = make_view_subset(sino.views(), kept);
  std::vector<double> angles;
  angles.reserve(subset.indices.size());
  for (int idx : subset.indices) angles.push_back(sino.angles[idx]);
  Sinogram out(sino.geometry, std::move(angles));
  const std::size_t per_view = static_cast<std::size_t>(sino.rows()) * sino.det_count();
  for (std::size_t n = 0; n < subset.indices.size(); ++n)
    std::copy_n(sino.values.begin() + static_cast<std::ptrdiff_t>(subset.indices[n] * per_view),
                per_view, out.values.begin() + static_cast<std::ptrdiff_t>(n * per_view));
  return out;
}

float clip_to_window(float hu, const WindowSpec& window) {
  return static_cast<float>(std::clamp<double>(hu, window.lower(), window.upper()));
}

VoxelVolume window_normalize(const VoxelVolume& hu_volume, const WindowSpec& window) {
  window.validate();
  require_unit(hu_volume, Unit::hu, "window_normalize");
  std::vector<float> out(hu_volume.size());
  const auto in = hu_volume.values();
  const double lower = window.lower();
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double t = std::clamp((in[n] - lower) / window.width, 0.0, 1.0);
    out[n] = static_cast<float>(std::nearbyint(t * kLattice) / kLattice);
  }
  return {hu_volume.shape(), hu_volume.spacing(), Unit::normalized, std::move(out)};
}

VoxelVolume hu_to_attenuation(const VoxelVolume& hu_volume) {
  require_unit(hu_volume, Unit::hu, "hu_to_attenuation");
  std::vector<float> out(hu_volume.size());
  const auto in = hu_volume.values();
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = static_cast<float>(kMuWater * (1.0 + in[n] / 1000.0));
  return {hu_volume.shape(), hu_volume.spacing(), Unit::attenuation, std::move(out)};
}

VoxelVolume attenuation_to_hu(const VoxelVolume& mu_volume) {
  require_unit(mu_volume, Unit::attenuation, "attenuation_to_hu");
  std::vector<float> out(mu_volume.size());
  const auto in = mu_volume.values();
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = static_cast<float>(1000.0 * (in[n] / kMuWater - 1.0));
  return {mu_volume.shape(), mu_volume.spacing(), Unit::hu, std::move(out)};
}

VoxelVolume residual_target(const VoxelVolume& full, const VoxelVolume& sparse) {
  require_same_shape(full, sparse, "residual_target");
  require_unit(full, Unit::normalized, "residual_target");
  require_unit(sparse, Unit::normalized, "residual_target");
  return difference(full, sparse);
}

VoxelVolume artifact_target(const VoxelVolume& full, const VoxelVolume& sparse) {
  require_same_shape(full, sparse, "artifact_target");
  require_unit(full, Unit::normalized, "artifact_target");
  require_unit(sparse, Unit::normalized, "artifact_target");
  return difference(sparse, full);
}

VoxelVolume apply_correction(const VoxelVolume& sparse, const VoxelVolume& predicted_artifact) {
  require_same_shape(sparse, predicted_artifact, "apply_correction");
  require_unit(sparse, Unit::normalized, "apply_correction");
  VoxelVolume out = difference(sparse, predicted_artifact);
  const auto v = out.values();
  const bool in_range = std::all_of(v.begin(), v.end(), [](float x) { return x >= 0.0f && x <= 1.0f; });
  return in_range ? out.retagged(Unit::normalized) : out;
}

VoxelVolume clip_normalized(const VoxelVolume& volume) {
  std::vector<float> out(volume.data());
  for (float& x : out) x = std::clamp(x, 0.0f, 1.0f);
  return {volume.shape(), volume.spacing(), Unit::normalized, std::move(out)};
}

VoxelVolume simulate_reconstruction(const VoxelVolume& hu_volume, BeamKind kind, int views,
                                    const FilterSpec& filter) {
  const VoxelVolume mu = hu_to_attenuation(hu_volume);
  const BeamGeometry geo = geometry_for_volume(kind, mu.shape(), mu.spacing());
  const auto angles = scan_angles(geo, views);
  if (kind == BeamKind::cone) {
    const Sinogram sino = forward_project_cone(mu, geo, angles);
    return attenuation_to_hu(fdk_cone(sino, mu.shape(), mu.spacing(), filter));
  }
  VoxelVolume out(mu.shape(), mu.spacing(), Unit::attenuation);
  const Shape3 slice_shape{mu.shape().nx, mu.shape().ny, 1};
  for (int k = 0; k < mu.shape().nz; ++k) {
    const Sinogram sino = forward_project_slice(mu.slice(k), geo, angles);
    out.set_slice(k, reconstruct(sino, slice_shape, mu.spacing(), filter));
  }
  return attenuation_to_hu(out);
}

CaseBundle simulate_case(const VoxelVolume& hu_volume, BeamKind kind, const WindowSpec& window,
                         const SimulationOptions& options, std::string subject) {
  window.validate();
  require_unit(hu_volume, Unit::hu, "simulate_case");
  if (hu_volume.shape().nx != hu_volume.shape().ny)
    throw InvalidInput("simulate_case needs square axial slices");
  for (int level : options.sparse_levels) make_view_subset(options.full_views, level);

  const VoxelVolume mu = hu_to_attenuation(hu_volume);
  const BeamGeometry geo = geometry_for_volume(kind, mu.shape(), mu.spacing());
  const auto angles = scan_angles(geo, options.full_views);
  const Shape3 shape = mu.shape();

  VoxelVolume full_mu(shape, mu.spacing(), Unit::attenuation);
  std::map<int, VoxelVolume> sparse_mu;
  for (int level : options.sparse_levels)
    sparse_mu.emplace(level, VoxelVolume(shape, mu.spacing(), Unit::attenuation));

  if (kind == BeamKind::cone) {
    const Sinogram sino = forward_project_cone(mu, geo, angles);
    full_mu = fdk_cone(sino, shape, mu.spacing(), options.filter);
    for (int level : options.sparse_levels)
      sparse_mu[level] = fdk_cone(subsample_views(sino, level), shape, mu.spacing(), options.filter);
  } else {
    const Shape3 slice_shape{shape.nx, shape.ny, 1};
    for (int k = 0; k < shape.nz; ++k) {
      const Sinogram sino = forward_project_slice(mu.slice(k), geo, angles);
      full_mu.set_slice(k, reconstruct(sino, slice_shape, mu.spacing(), options.filter));
      for (int level : options.sparse_levels)
        sparse_mu[level].set_slice(
            k, reconstruct(subsample_views(sino, level), slice_shape, mu.spacing(), options.filter));
    }
  }

  CaseBundle bundle;
  bundle.subject = std::move(subject);
  bundle.geometry = kind;
  bundle.window = window;
  bundle.full = window_normalize(attenuation_to_hu(full_mu), window);
  for (auto& [level, vol] : sparse_mu) {
    VoxelVolume sparse = window_normalize(attenuation_to_hu(vol), window);
    bundle.residual.emplace(level, residual_target(bundle.full, sparse));
    bundle.sparse.emplace(level, std::move(sparse));
  }
  return bundle;
}

}  // namespace sparsect
