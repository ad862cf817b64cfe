#include "sparsect/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace sparsect {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

static_assert(sizeof(float) == 4);

std::uint32_t swap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint64_t get_u64_le(const char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(p[b]);
  return v;
}

std::size_t shape_product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

struct ParsedHeader {
  std::vector<int> shape;
  TensorMetadata metadata;
  std::size_t payload_offset = 0;
};

ParsedHeader parse_header(std::string_view bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kTensorMagic, 8) != 0)
    throw FormatError("not a tensor container (bad magic)");
  const std::uint64_t len = get_u64_le(bytes.data() + 8);
  if (len > bytes.size() - 16) throw CorruptionError("tensor header is truncated");
  json h;
  try {
    h = json::parse(bytes.substr(16, len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("unparseable tensor header: ") + e.what());
  }
  if (!h.is_object() || h.value("dtype", "") != "f32" || h.value("layout", "") != "row-major")
    throw FormatError("tensor header must declare dtype f32 and row-major layout");
  if (!h.contains("shape") || !h["shape"].is_array() || h["shape"].empty())
    throw FormatError("tensor header has no shape");
  ParsedHeader out;
  for (const auto& d : h["shape"]) {
    if (!d.is_number_integer() || d.get<long long>() < 1)
      throw FormatError("tensor shape entries must be positive integers");
    out.shape.push_back(d.get<int>());
  }
  out.metadata.unit = h.value("unit", "normalized");
  if (h.contains("provenance")) out.metadata.provenance = h["provenance"];
  out.payload_offset = 16 + len;
  const std::size_t expected = shape_product(out.shape) * 4;
  const std::size_t actual = bytes.size() - out.payload_offset;
  if (actual < expected)
    throw CorruptionError("tensor payload is truncated: " + std::to_string(actual) + " of " +
                          std::to_string(expected) + " bytes");
  if (actual > expected) throw CorruptionError("tensor payload has trailing bytes");
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return std::move(ss).str();
}

void spill(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "'");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

std::string encode_tensor(const Tensor& tensor, const TensorMetadata& metadata) {
  if (tensor.shape.empty()) throw InvalidInput("write_tensor: shape must be nonempty");
  if (shape_product(tensor.shape) != tensor.values.size())
    throw InvalidInput("write_tensor: value count does not match shape");
  const json header = {{"dtype", "f32"},
                       {"shape", tensor.shape},
                       {"layout", "row-major"},
                       {"unit", metadata.unit},
                       {"provenance", metadata.provenance}};
  const std::string text = header.dump();
  std::string out;
  out.reserve(16 + text.size() + tensor.values.size() * 4);
  out.append(kTensorMagic, 8);
  put_u64_le(out, text.size());
  out += text;
  const std::size_t offset = out.size();
  out.resize(offset + tensor.values.size() * 4);
  std::memcpy(out.data() + offset, tensor.values.data(), tensor.values.size() * 4);
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t n = 0; n < tensor.values.size(); ++n) {
      std::uint32_t w;
      std::memcpy(&w, out.data() + offset + 4 * n, 4);
      w = swap32(w);
      std::memcpy(out.data() + offset + 4 * n, &w, 4);
    }
  }
  return out;
}

TensorFile decode_tensor(std::string_view bytes) {
  ParsedHeader h = parse_header(bytes);
  TensorFile out;
  out.metadata = std::move(h.metadata);
  std::vector<float> values(shape_product(h.shape));
  std::memcpy(values.data(), bytes.data() + h.payload_offset, values.size() * 4);
  if constexpr (std::endian::native == std::endian::big) {
    for (float& v : values) v = std::bit_cast<float>(swap32(std::bit_cast<std::uint32_t>(v)));
  }
  out.tensor = Tensor(std::move(h.shape), std::move(values));
  return out;
}

void write_tensor(const fs::path& path, const Tensor& tensor, const TensorMetadata& metadata) {
  spill(path, encode_tensor(tensor, metadata));
}

TensorFile read_tensor(const fs::path& path) {
  const std::string bytes = slurp(path);
  try {
    return decode_tensor(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const CorruptionError& e) {
    throw CorruptionError(path.string() + ": " + e.what());
  }
}

TensorHeader read_tensor_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  char prefix[16] = {};
  in.read(prefix, 16);
  if (in.gcount() < 16 || std::memcmp(prefix, kTensorMagic, 8) != 0)
    throw FormatError(path.string() + ": not a tensor container (bad magic)");
  const std::uint64_t len = get_u64_le(prefix + 8);
  const auto file_size = fs::file_size(path);
  if (len > file_size - 16) throw CorruptionError(path.string() + ": tensor header is truncated");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  const std::size_t payload = file_size - 16 - len;
  json h;
  try {
    h = json::parse(text);
  } catch (const json::exception&) {
    throw FormatError(path.string() + ": unparseable tensor header");
  }
  TensorHeader out;
  if (!h.contains("shape") || !h["shape"].is_array())
    throw FormatError(path.string() + ": tensor header has no shape");
  out.shape = h["shape"].get<std::vector<int>>();
  out.metadata.unit = h.value("unit", "normalized");
  if (h.contains("provenance")) out.metadata.provenance = h["provenance"];
  if (payload != shape_product(out.shape) * 4)
    throw CorruptionError(path.string() + ": payload length does not match header shape");
  return out;
}

void write_volume(const fs::path& path, const VoxelVolume& volume, json provenance) {
  const Spacing3& s = volume.spacing();
  provenance["spacing"] = {s.sx, s.sy, s.sz};
  write_tensor(path, to_tensor(volume), {std::string(to_string(volume.unit())), provenance});
}

VoxelVolume read_volume(const fs::path& path) {
  TensorFile f = read_tensor(path);
  Spacing3 spacing{};
  const json& p = f.metadata.provenance;
  if (p.is_object() && p.contains("spacing")) {
    const auto s = p["spacing"].get<std::vector<double>>();
    if (s.size() != 3) throw FormatError(path.string() + ": spacing must have 3 entries");
    spacing = {s[0], s[1], s[2]};
  }
  return volume_from_tensor(f.tensor, spacing, unit_from_string(f.metadata.unit));
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "unknown";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "validation") return Split::validation;
  if (name == "test") return Split::test;
  throw InvalidInput("unknown split '" + std::string(name) + "'");
}

const SubjectEntry* DatasetManifest::subject(const std::string& id) const {
  for (const auto& s : subjects)
    if (s.id == id) return &s;
  return nullptr;
}

const CaseEntry* DatasetManifest::find_case(const std::string& id, BeamKind geometry) const {
  for (const auto& c : cases)
    if (c.subject == id && c.geometry == geometry) return &c;
  return nullptr;
}

void DatasetManifest::upsert_case(CaseEntry entry) {
  if (subject(entry.subject) == nullptr) subjects.push_back({entry.subject, std::nullopt});
  for (auto& c : cases)
    if (c.subject == entry.subject && c.geometry == entry.geometry) {
      c = std::move(entry);
      return;
    }
  cases.push_back(std::move(entry));
}

void DatasetManifest::replace_samples(const std::string& mode, std::vector<SampleEntry> fresh) {
  std::erase_if(samples, [&](const SampleEntry& s) { return s.mode == mode; });
  for (auto& s : fresh) samples.push_back(std::move(s));
}

namespace {

json ref_json(const FileRef& r) { return {{"path", r.path}, {"shape", r.shape}, {"role", r.role}}; }

FileRef ref_from(const json& j) {
  return {j.at("path").get<std::string>(), j.at("shape").get<std::vector<int>>(),
          j.at("role").get<std::string>()};
}

json level_map(const std::map<int, FileRef>& m) {
  json out = json::object();
  for (const auto& [v, r] : m) out[std::to_string(v)] = ref_json(r);
  return out;
}

std::map<int, FileRef> level_map_from(const json& j) {
  std::map<int, FileRef> out;
  for (const auto& [k, v] : j.items()) out[std::stoi(k)] = ref_from(v);
  return out;
}

}  // namespace

json to_json(const DatasetManifest& m) {
  json doc;
  doc["format"] = "sparsect-manifest";
  doc["version"] = m.version;
  doc["split_seed"] = m.split_seed ? json(*m.split_seed) : json(nullptr);
  doc["blocks"] = {{"block_size", m.blocks.block_size}, {"margin", m.blocks.margin}};
  doc["subjects"] = json::array();
  for (const auto& s : m.subjects)
    doc["subjects"].push_back(
        {{"id", s.id}, {"split", s.split ? json(std::string(to_string(*s.split))) : json(nullptr)}});
  doc["cases"] = json::array();
  for (const auto& c : m.cases)
    doc["cases"].push_back({{"subject", c.subject},
                            {"geometry", std::string(to_string(c.geometry))},
                            {"window", format_window(c.window)},
                            {"shape", {c.shape.nx, c.shape.ny, c.shape.nz}},
                            {"spacing", {c.spacing.sx, c.spacing.sy, c.spacing.sz}},
                            {"full_views", c.full_views},
                            {"full", ref_json(c.full)},
                            {"sparse", level_map(c.sparse)},
                            {"residual", level_map(c.residual)}});
  doc["samples"] = json::array();
  for (const auto& s : m.samples) {
    json loc = json::object();
    if (s.slice >= 0) loc["slice"] = s.slice;
    if (s.block[0] >= 0) loc["block"] = s.block;
    doc["samples"].push_back({{"id", s.id},
                              {"subject", s.subject},
                              {"geometry", std::string(to_string(s.geometry))},
                              {"views", s.views},
                              {"mode", s.mode},
                              {"input", ref_json(s.input)},
                              {"target", ref_json(s.target)},
                              {"location", loc}});
  }
  return doc;
}

DatasetManifest manifest_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "sparsect-manifest")
      throw FormatError("not a sparsect manifest");
    DatasetManifest m;
    m.version = doc.at("version").get<int>();
    if (doc.contains("split_seed") && !doc["split_seed"].is_null())
      m.split_seed = doc["split_seed"].get<std::uint64_t>();
    if (doc.contains("blocks"))
      m.blocks = {doc["blocks"].at("block_size").get<int>(), doc["blocks"].at("margin").get<int>()};
    for (const auto& s : doc.at("subjects")) {
      SubjectEntry e{s.at("id").get<std::string>(), std::nullopt};
      if (s.contains("split") && !s["split"].is_null())
        e.split = split_from_string(s["split"].get<std::string>());
      m.subjects.push_back(std::move(e));
    }
    for (const auto& c : doc.at("cases")) {
      CaseEntry e;
      e.subject = c.at("subject").get<std::string>();
      e.geometry = beam_kind_from_string(c.at("geometry").get<std::string>());
      e.window = parse_window(c.at("window").get<std::string>());
      const auto sh = c.at("shape").get<std::vector<int>>();
      const auto sp = c.at("spacing").get<std::vector<double>>();
      if (sh.size() != 3 || sp.size() != 3) throw FormatError("case shape/spacing need 3 entries");
      e.shape = {sh[0], sh[1], sh[2]};
      e.spacing = {sp[0], sp[1], sp[2]};
      e.full_views = c.value("full_views", kFullViews);
      e.full = ref_from(c.at("full"));
      e.sparse = level_map_from(c.at("sparse"));
      e.residual = level_map_from(c.at("residual"));
      m.cases.push_back(std::move(e));
    }
    for (const auto& s : doc.at("samples")) {
      SampleEntry e;
      e.id = s.at("id").get<std::string>();
      e.subject = s.at("subject").get<std::string>();
      e.geometry = beam_kind_from_string(s.at("geometry").get<std::string>());
      e.views = s.at("views").get<int>();
      e.mode = s.at("mode").get<std::string>();
      e.input = ref_from(s.at("input"));
      e.target = ref_from(s.at("target"));
      const json& loc = s.at("location");
      if (loc.contains("slice")) e.slice = loc["slice"].get<int>();
      if (loc.contains("block")) e.block = loc["block"].get<std::array<int, 3>>();
      m.samples.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

DatasetManifest load_manifest(const fs::path& path) {
  const std::string text = slurp(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return manifest_from_json(doc);
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
  spill(path, to_json(manifest).dump(2) + "\n");
}

std::array<int, 3> split_counts(int n) {
  if (n < 3) throw InvalidInput("assign_splits needs at least 3 subjects");
  const int test = static_cast<int>(std::floor(0.4 * n));
  const int val = std::max(1, static_cast<int>(std::lround(0.1 * n)));
  return {n - test - val, val, test};
}

std::map<std::string, Split> assign_splits(const std::vector<std::string>& ids,
                                           std::uint64_t seed) {
  const std::set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) throw InvalidInput("assign_splits: duplicate subject id");
  const auto counts = split_counts(static_cast<int>(ids.size()));
  // Sort first so the assignment does not depend on input order.
  std::vector<std::string> order(unique.begin(), unique.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  std::map<std::string, Split> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int n = static_cast<int>(i);
    out[order[i]] = n < counts[0]               ? Split::train
                    : n < counts[0] + counts[1] ? Split::validation
                                                : Split::test;
  }
  return out;
}

bool same_spatial_shape(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty()) return false;
  return std::equal(a.begin(), a.end() - 1, b.begin());
}

std::vector<std::string> verify_manifest(const DatasetManifest& m, const fs::path& root) {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const auto& s : m.subjects)
    if (!seen.insert(s.id).second) problems.push_back("subject listed twice: " + s.id);

  auto check = [&](const FileRef& r) {
    const fs::path p = root / r.path;
    if (!fs::exists(p)) {
      problems.push_back("missing file: " + r.path);
      return;
    }
    try {
      const TensorHeader h = read_tensor_header(p);
      if (h.shape != r.shape) problems.push_back("header shape differs from manifest: " + r.path);
    } catch (const std::exception& e) {
      problems.push_back(e.what());
    }
  };
  for (const auto& c : m.cases) {
    if (m.subject(c.subject) == nullptr) problems.push_back("case for unknown subject " + c.subject);
    check(c.full);
    for (const auto& [v, r] : c.sparse) check(r);
    for (const auto& [v, r] : c.residual) check(r);
  }
  for (const auto& s : m.samples) {
    if (m.subject(s.subject) == nullptr) problems.push_back("sample for unknown subject " + s.subject);
    if (!same_spatial_shape(s.input.shape, s.target.shape))
      problems.push_back("target shape differs from input: " + s.id);
    check(s.input);
    check(s.target);
  }
  return problems;
}

}  // namespace sparsect
