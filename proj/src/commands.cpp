#include "sparsect/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "sparsect/phantom.hpp"
#include "sparsect/simulate.hpp"

namespace sparsect {

using nlohmann::json;

void validate_mode(const std::string& mode) {
  if (std::find(kSampleModes.begin(), kSampleModes.end(), mode) == kSampleModes.end())
    throw InvalidInput("unknown sample mode '" + mode + "'");
}

bool is_block_mode(const std::string& mode) { return mode != "2d" && mode != "2d3ch"; }

namespace {

std::string rel(const fs::path& p, const fs::path& root) {
  return fs::relative(p, root).generic_string();
}

std::string level_tag(int views) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "v%03d", views);
  return buf;
}

fs::path manifest_path(const fs::path& dataset) { return dataset / kManifestName; }

DatasetManifest load_or_new(const fs::path& dataset) {
  const fs::path p = manifest_path(dataset);
  return fs::exists(p) ? load_manifest(p) : DatasetManifest{};
}

std::ofstream open_text(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

FileRef save(const fs::path& root, const fs::path& path, const VoxelVolume& v,
             const std::string& role, json provenance) {
  write_volume(path, v, std::move(provenance));
  const Shape3& s = v.shape();
  return {rel(path, root), {s.nz, s.ny, s.nx}, role};
}

}  // namespace

fs::path cmd_phantom(const PhantomConfig& c) {
  if (c.size < 1 || c.slices < 0 || !(c.pitch > 0.0) || c.supersample < 1)
    throw InvalidInput("phantom: size, slices, pitch and supersample must be positive");
  const Shape3 shape{c.size, c.size, c.slices == 0 ? c.size : c.slices};
  const Spacing3 spacing{c.pitch, c.pitch, c.pitch};
  const auto specs = c.specs_path.empty() ? thorax_specs(shape, spacing, c.seed)
                                          : load_phantom_specs(c.specs_path);
  const VoxelVolume hu = generate_phantom(shape, spacing, specs, c.supersample);
  const fs::path dir = c.out / "phantoms";
  const fs::path path = dir / (c.subject + ".spct");
  write_volume(path, hu,
               {{"kind", "phantom"},
                {"subject", c.subject},
                {"seed", c.seed},
                {"supersample", c.supersample},
                {"specs", c.specs_path.empty() ? "thorax" : c.specs_path}});
  save_phantom_specs((dir / (c.subject + "_specs.json")).string(), specs);
  return path;
}

CaseEntry cmd_simulate(const SimulateConfig& c) {
  if (c.views.empty()) throw InvalidInput("simulate: no sparse view levels given");
  const VoxelVolume hu = read_volume(c.input);
  SimulationOptions opts;
  opts.sparse_levels = c.views;
  opts.full_views = c.full_views;
  opts.filter = c.filter;
  const CaseBundle bundle = simulate_case(hu, c.geometry, c.window, opts, c.subject);

  const fs::path dir = c.out / "cases" / c.subject / std::string(to_string(c.geometry));
  const json prov = {{"subject", c.subject},
                     {"geometry", std::string(to_string(c.geometry))},
                     {"window", format_window(c.window)},
                     {"full_views", c.full_views},
                     {"filter", std::string(to_string(c.filter.kind))}};
  CaseEntry entry;
  entry.subject = c.subject;
  entry.geometry = c.geometry;
  entry.window = c.window;
  entry.shape = hu.shape();
  entry.spacing = hu.spacing();
  entry.full_views = c.full_views;
  json p = prov;
  p["views"] = c.full_views;
  entry.full = save(c.out, dir / "full.spct", bundle.full, "full", p);
  for (const auto& [views, sparse] : bundle.sparse) {
    p["views"] = views;
    entry.sparse[views] =
        save(c.out, dir / ("sparse_" + level_tag(views) + ".spct"), sparse, "sparse", p);
    entry.residual[views] = save(c.out, dir / ("residual_" + level_tag(views) + ".spct"),
                                 bundle.residual.at(views), "residual", p);
  }

  std::ofstream summary = open_text(dir / "summary.tsv");
  summary << "views\tsparse_mse\tsparse_ssim\n";
  for (const auto& [views, sparse] : bundle.sparse) {
    char line[96];
    std::snprintf(line, sizeof line, "%d\t%.6e\t%.6f\n", views, mean(slice_mse(sparse, bundle.full)),
                  mean(slice_ssim(sparse, bundle.full)));
    summary << line;
  }

  DatasetManifest m = load_or_new(c.out);
  m.upsert_case(entry);
  save_manifest(manifest_path(c.out), m);
  return entry;
}

std::map<std::string, Split> cmd_split(const SplitConfig& c) {
  DatasetManifest m = load_manifest(manifest_path(c.dataset));
  std::vector<std::string> ids;
  for (const auto& s : m.subjects) ids.push_back(s.id);
  const auto splits = assign_splits(ids, c.seed);
  for (auto& s : m.subjects) s.split = splits.at(s.id);
  m.split_seed = c.seed;
  save_manifest(manifest_path(c.dataset), m);
  return splits;
}

namespace {

Tensor as_block_tensor(const VoxelVolume& v) {
  Tensor t = to_tensor(v);
  t.shape.push_back(1);
  return t;
}

Tensor block_sample(const Block& b, const std::string& mode) {
  if (mode == "3d") return as_block_tensor(b.values);
  if (mode == "25d") return extract_25d(b);
  return extract_directional_patch(b, plane_from_string(mode.substr(6)));
}

std::string block_tag(const std::array<int, 3>& c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "b%02d_%02d_%02d", c[0], c[1], c[2]);
  return buf;
}

std::string slice_tag(int z) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "z%04d", z);
  return buf;
}

}  // namespace

std::size_t cmd_extract(const ExtractConfig& c) {
  validate_mode(c.mode);
  DatasetManifest m = load_manifest(manifest_path(c.dataset));
  if (m.cases.empty()) throw InvalidInput("extract: manifest lists no simulated cases");
  const bool blocks = is_block_mode(c.mode);
  if (blocks) m.blocks = {c.block_size, c.margin};

  std::vector<SampleEntry> samples;
  for (const CaseEntry& ce : m.cases) {
    const VoxelVolume full = read_volume(c.dataset / ce.full.path);
    const std::string geo(to_string(ce.geometry));
    for (const auto& [views, ref] : ce.sparse) {
      const VoxelVolume sparse = read_volume(c.dataset / ref.path);
      const VoxelVolume artifact = artifact_target(full, sparse);
      const fs::path dir =
          c.dataset / "samples" / c.mode / geo / ce.subject / level_tag(views);
      const json prov = {{"subject", ce.subject}, {"geometry", geo}, {"views", views},
                         {"mode", c.mode}};
      auto emit = [&](const std::string& tag, const Tensor& in, const Tensor& tgt, int slice,
                      std::array<int, 3> block) {
        SampleEntry s;
        s.id = ce.subject + "-" + geo + "-" + level_tag(views) + "-" + c.mode + "-" + tag;
        s.subject = ce.subject;
        s.geometry = ce.geometry;
        s.views = views;
        s.mode = c.mode;
        s.slice = slice;
        s.block = block;
        json p = prov;
        p["sample"] = s.id;
        const fs::path ip = dir / (tag + "_input.spct");
        const fs::path tp = dir / (tag + "_target.spct");
        write_tensor(ip, in, {"normalized", p});
        write_tensor(tp, tgt, {"difference", p});
        s.input = {rel(ip, c.dataset), in.shape, "input-" + c.mode};
        s.target = {rel(tp, c.dataset), tgt.shape, "target"};
        samples.push_back(std::move(s));
      };

      if (!blocks) {
        for (int z = 0; z < sparse.shape().nz; ++z) {
          if (c.mode == "2d")
            emit(slice_tag(z), extract_2d(sparse, z), extract_2d(artifact, z), z, {-1, -1, -1});
          else
            emit(slice_tag(z), extract_2d3ch(sparse, z), extract_2d(artifact, z), z, {-1, -1, -1});
        }
      } else {
        const BlockGrid grid = plan_grid(sparse.shape(), c.block_size, c.margin);
        const auto in_blocks = decompose(sparse, grid);
        const auto tgt_blocks = decompose(artifact, grid);
        for (std::size_t b = 0; b < in_blocks.size(); ++b)
          emit(block_tag(in_blocks[b].coords), block_sample(in_blocks[b], c.mode),
               block_sample(tgt_blocks[b], c.mode), -1, in_blocks[b].coords);
      }
    }
  }
  const std::size_t count = samples.size();
  m.replace_samples(c.mode, std::move(samples));
  save_manifest(manifest_path(c.dataset), m);
  return count;
}

namespace {

bool in_split(const DatasetManifest& m, const std::string& subject, std::optional<Split> split) {
  if (!split) return true;
  const SubjectEntry* s = m.subject(subject);
  return s != nullptr && s->split == split;
}

void require_splits(const DatasetManifest& m, std::optional<Split> split) {
  if (!split) return;
  for (const auto& s : m.subjects)
    if (!s.split) throw InvalidInput("subjects have no split assignment; run `split` first");
}

fs::path prediction_path(const fs::path& dir, const SampleEntry& s) {
  return dir / (s.id + ".spct");
}

}  // namespace

std::size_t cmd_stub_predictions(const StubConfig& c) {
  validate_mode(c.mode);
  const DatasetManifest m = load_manifest(manifest_path(c.dataset));
  require_splits(m, c.split);
  std::size_t count = 0;
  for (const SampleEntry& s : m.samples) {
    if (s.mode != c.mode || !in_split(m, s.subject, c.split)) continue;
    const json prov = {{"sample", s.id}, {"kind", c.kind == StubKind::zero ? "zero" : "oracle"}};
    if (c.kind == StubKind::zero) {
      write_tensor(prediction_path(c.out, s), Tensor(s.target.shape), {"difference", prov});
    } else {
      TensorFile t = read_tensor(c.dataset / s.target.path);
      write_tensor(prediction_path(c.out, s), t.tensor, {"difference", prov});
    }
    ++count;
  }
  if (count == 0) throw InvalidInput("no samples of mode '" + c.mode + "' in the requested split");
  return count;
}

void write_pgm(const fs::path& path, const VoxelVolume& image, double lo, double hi) {
  if (!image.is_image()) throw InvalidInput("write_pgm: expected a 2D image");
  if (!(hi > lo)) throw InvalidInput("write_pgm: empty display range");
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const Shape3& s = image.shape();
  out << "P5\n" << s.nx << ' ' << s.ny << "\n255\n";
  std::string row(static_cast<std::size_t>(s.nx), '\0');
  for (int y = 0; y < s.ny; ++y) {
    for (int x = 0; x < s.nx; ++x) {
      const double t = std::clamp((image.at(x, y) - lo) / (hi - lo), 0.0, 1.0);
      row[static_cast<std::size_t>(x)] = static_cast<char>(std::lround(t * 255.0));
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

namespace {

Tensor read_prediction(const fs::path& dir, const SampleEntry& s) {
  const fs::path p = prediction_path(dir, s);
  if (!fs::exists(p)) throw IncompleteSetError("missing prediction for sample " + s.id);
  TensorFile f = read_tensor(p);
  if (f.tensor.shape != s.target.shape)
    throw InvalidInput("prediction for " + s.id + " has the wrong shape");
  return std::move(f.tensor);
}

// Predicted artifact volume assembled from slice or block predictions.
VoxelVolume assemble(const std::vector<const SampleEntry*>& samples, const CaseEntry& ce,
                     const DatasetManifest& m, const std::string& mode, const fs::path& preds) {
  VoxelVolume out(ce.shape, ce.spacing, Unit::difference);
  if (mode == "3d") {
    const BlockGrid grid = plan_grid(ce.shape, m.blocks.block_size, m.blocks.margin);
    std::vector<Block> blocks;
    blocks.reserve(samples.size());
    for (const SampleEntry* s : samples) {
      const Tensor t = read_prediction(preds, *s);
      blocks.push_back({volume_from_tensor(t, ce.spacing, Unit::difference), s->block,
                        ce.subject, s->views});
    }
    return reassemble(blocks, grid);
  }
  std::vector<bool> have(static_cast<std::size_t>(ce.shape.nz), false);
  const std::size_t plane = static_cast<std::size_t>(ce.shape.nx) * ce.shape.ny;
  for (const SampleEntry* s : samples) {
    if (s->slice < 0 || s->slice >= ce.shape.nz) throw InvalidInput("bad slice in " + s->id);
    const Tensor t = read_prediction(preds, *s);
    float* dst = out.values().data() + plane * static_cast<std::size_t>(s->slice);
    std::copy(t.values.begin(), t.values.end(), dst);
    have[static_cast<std::size_t>(s->slice)] = true;
  }
  if (std::find(have.begin(), have.end(), false) != have.end())
    throw IncompleteSetError("slice predictions do not cover every slice of " + ce.subject);
  return out;
}

Tensor minus(const Tensor& a, const Tensor& b) {
  Tensor out(a.shape);
  for (std::size_t n = 0; n < a.values.size(); ++n) out.values[n] = a.values[n] - b.values[n];
  return out;
}

Tensor clipped(Tensor t) {
  for (float& v : t.values) v = std::clamp(v, 0.0f, 1.0f);
  return t;
}

ScoreRow score_patches(int views, const std::vector<const SampleEntry*>& samples,
                       const VoxelVolume& full, const DatasetManifest& m, const std::string& mode,
                       const ScoreConfig& c) {
  const BlockGrid grid = plan_grid(full.shape(), m.blocks.block_size, m.blocks.margin);
  ScoreRow row;
  row.views = views;
  for (const SampleEntry* s : samples) {
    const Tensor input = read_tensor(c.dataset / s->input.path).tensor;
    const Tensor pred = read_prediction(c.predictions, *s);
    const Tensor ref = block_sample(extract_block(full, grid, s->block), mode);
    if (ref.shape != input.shape) throw InvalidInput("sample " + s->id + " has the wrong shape");
    const Tensor fixed = clipped(minus(input, pred));
    row.sparse_mse += patch_mse(input, ref);
    row.corrected_mse += patch_mse(fixed, ref);
    row.sparse_ssim += patch_ssim(input, ref, c.ssim);
    row.corrected_ssim += patch_ssim(fixed, ref, c.ssim);
  }
  const double n = static_cast<double>(samples.size());
  row.sparse_mse /= n;
  row.corrected_mse /= n;
  row.sparse_ssim /= n;
  row.corrected_ssim /= n;
  return row;
}

void export_images(const fs::path& dir, const std::string& stem, const VoxelVolume& full,
                   const VoxelVolume& sparse, const VoxelVolume& corrected) {
  const int z = full.shape().nz / 2;
  const VoxelVolume f = full.slice(z);
  const VoxelVolume s = sparse.slice(z);
  const VoxelVolume k = clip_normalized(corrected).slice(z);
  write_pgm(dir / (stem + "_full.pgm"), f, 0.0, 1.0);
  write_pgm(dir / (stem + "_sparse.pgm"), s, 0.0, 1.0);
  write_pgm(dir / (stem + "_corrected.pgm"), k, 0.0, 1.0);
  write_pgm(dir / (stem + "_diff_sparse.pgm"), residual_target(f, s),
            -0.3, 0.3);
  write_pgm(dir / (stem + "_diff_corrected.pgm"), artifact_target(f, k), -0.3, 0.3);
}

json scores_json(const std::vector<CaseScores>& cases) {
  json out = json::array();
  for (const auto& c : cases) {
    json rows = json::array();
    for (const auto& r : c.rows)
      rows.push_back({{"views", r.views},
                      {"sparse_mse", r.sparse_mse},
                      {"corrected_mse", r.corrected_mse},
                      {"sparse_ssim", r.sparse_ssim},
                      {"corrected_ssim", r.corrected_ssim}});
    out.push_back({{"subject", c.subject},
                   {"geometry", std::string(to_string(c.geometry))},
                   {"mode", c.mode},
                   {"rows", rows}});
  }
  return out;
}

}  // namespace

std::vector<CaseScores> cmd_score(const ScoreConfig& c) {
  validate_mode(c.mode);
  c.ssim.validate();
  const DatasetManifest m = load_manifest(manifest_path(c.dataset));
  require_splits(m, c.split);

  std::vector<CaseScores> results;
  for (const CaseEntry& ce : m.cases) {
    if (!in_split(m, ce.subject, c.split)) continue;
    CaseScores cs{ce.subject, ce.geometry, c.mode, {}};
    const VoxelVolume full = read_volume(c.dataset / ce.full.path);
    for (const auto& [views, ref] : ce.sparse) {
      std::vector<const SampleEntry*> samples;
      for (const SampleEntry& s : m.samples)
        if (s.mode == c.mode && s.subject == ce.subject && s.geometry == ce.geometry &&
            s.views == views)
          samples.push_back(&s);
      if (samples.empty())
        throw IncompleteSetError("no '" + c.mode + "' samples for " + ce.subject + " " +
                                 std::string(to_string(ce.geometry)) + " " + level_tag(views));
      if (c.mode == "2d" || c.mode == "2d3ch" || c.mode == "3d") {
        const VoxelVolume sparse = read_volume(c.dataset / ref.path);
        const VoxelVolume pred = assemble(samples, ce, m, c.mode, c.predictions);
        const VoxelVolume corrected = apply_correction(sparse, pred);
        cs.rows.push_back(score_volumes(views, full, sparse, corrected, c.ssim));
        if (c.images)
          export_images(c.out / "images",
                        ce.subject + "_" + std::string(to_string(ce.geometry)) + "_" +
                            level_tag(views),
                        full, sparse, corrected);
      } else {
        cs.rows.push_back(score_patches(views, samples, full, m, c.mode, c));
      }
    }
    results.push_back(std::move(cs));
  }
  if (results.empty()) throw InvalidInput("score: no cases in the requested split");

  const auto aggregated = aggregate_scores(results);
  {
    std::ofstream out = open_text(c.out / "scores_long.tsv");
    write_scores_long(out, results);
  }
  {
    std::ofstream out = open_text(c.out / "scores_table.tsv");
    write_scores_table(out, aggregated);
  }
  {
    std::ofstream out = open_text(c.out / "scores.json");
    const json doc = {{"mode", c.mode},
                      {"split", c.split ? std::string(to_string(*c.split)) : "all"},
                      {"cases", scores_json(results)},
                      {"mean", scores_json(aggregated)}};
    out << doc.dump(2) << '\n';
  }
  return results;
}

}  // namespace sparsect
