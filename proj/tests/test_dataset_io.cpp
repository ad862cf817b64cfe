#include <doctest.h>

#include <cstring>
#include <fstream>
#include <set>

#include "sparsect/dataset_io.hpp"
#include "support.hpp"

using namespace sparsect;
namespace fs = std::filesystem;

namespace {

std::uint64_t read_u64_le(std::string_view bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(bytes[at + b]);
  return v;
}

std::string u64_le(std::uint64_t v) {
  std::string out(8, '\0');
  for (int b = 0; b < 8; ++b) out[b] = static_cast<char>((v >> (8 * b)) & 0xff);
  return out;
}

std::string f32_le(float x) {
  std::uint32_t bits;
  std::memcpy(&bits, &x, 4);
  std::string out(4, '\0');
  for (int b = 0; b < 4; ++b) out[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  return out;
}

Tensor ramp_tensor(std::vector<int> shape) {
  Tensor t(std::move(shape));
  for (std::size_t k = 0; k < t.values.size(); ++k) t.values[k] = 0.001f * static_cast<float>(k);
  return t;
}

std::vector<std::string> ids(int n) {
  std::vector<std::string> out;
  for (int k = 1; k <= n; ++k) out.push_back((k < 10 ? "S0" : "S") + std::to_string(k));
  return out;
}

}  // namespace

TEST_CASE("container layout") {
  const Tensor t = ramp_tensor({64, 64, 3});
  const std::string bytes = encode_tensor(t, {"difference", {{"views", 64}}});
  CHECK(bytes.substr(0, 8) == "SPCT0001");
  const std::uint64_t header_len = read_u64_le(bytes, 8);
  const auto header = nlohmann::json::parse(bytes.substr(16, header_len));
  CHECK(header["dtype"] == "f32");
  CHECK(header["layout"] == "row-major");
  CHECK(header["shape"] == std::vector<int>{64, 64, 3});
  CHECK(header["unit"] == "difference");
  CHECK(header["provenance"]["views"] == 64);
  CHECK(bytes.size() - 16 - header_len == 49152);
  CHECK(bytes.substr(16 + header_len + 4 * 5, 4) == f32_le(t.values[5]));
}

TEST_CASE("hand-built container decodes") {
  const std::string header =
      R"({"dtype":"f32","shape":[2,3],"layout":"row-major","unit":"hu","provenance":{"a":1}})";
  std::string bytes = "SPCT0001" + u64_le(header.size()) + header;
  for (int k = 0; k < 6; ++k) bytes += f32_le(static_cast<float>(k) - 2.5f);
  const TensorFile f = decode_tensor(bytes);
  CHECK(f.tensor.shape == std::vector<int>{2, 3});
  CHECK(f.tensor.values == std::vector<float>{-2.5f, -1.5f, -0.5f, 0.5f, 1.5f, 2.5f});
  CHECK(f.metadata.unit == "hu");
  CHECK(f.metadata.provenance["a"] == 1);
}

TEST_CASE("round trip through files") {
  testing_support::TempDir dir("io");
  for (const auto& shape : std::vector<std::vector<int>>{{7}, {3, 5}, {4, 5, 1}, {3, 4, 5, 2}}) {
    const Tensor t = ramp_tensor(shape);
    const fs::path p = dir.path() / "t.spct";
    write_tensor(p, t, {"normalized", {{"k", "v"}}});
    const TensorFile back = read_tensor(p);
    CHECK(back.tensor == t);
    CHECK(back.metadata.provenance["k"] == "v");
    CHECK(read_tensor_header(p).shape == shape);
  }
  const auto vol = testing_support::random_volume({6, 5, 4}, 9, Unit::hu, -1000, 1000,
                                                  {0.7, 0.7, 2.5});
  write_volume(dir.path() / "v.spct", vol, {{"subject", "S01"}});
  const VoxelVolume back = read_volume(dir.path() / "v.spct");
  CHECK(back == vol);
  CHECK(back.spacing() == vol.spacing());
  CHECK(back.unit() == Unit::hu);
  CHECK(read_tensor_header(dir.path() / "v.spct").shape == std::vector<int>{4, 5, 6});
}

TEST_CASE("malformed containers raise typed errors") {
  const std::string good = encode_tensor(ramp_tensor({4, 4}));
  std::string bad_magic = good;
  bad_magic[3] = 'X';
  CHECK_THROWS_AS(decode_tensor(bad_magic), FormatError);
  CHECK_THROWS_AS(decode_tensor(good.substr(0, good.size() - 1)), CorruptionError);
  CHECK_THROWS_AS(decode_tensor(good + "x"), CorruptionError);
  CHECK_THROWS_AS(decode_tensor(good.substr(0, 12)), FormatError);

  const std::string header = R"({"dtype":"f64","shape":[1],"layout":"row-major","unit":"hu","provenance":{}})";
  CHECK_THROWS_AS(decode_tensor("SPCT0001" + u64_le(header.size()) + header + std::string(8, '\0')),
                  FormatError);

  testing_support::TempDir dir("io-bad");
  {
    std::ofstream out(dir.path() / "cut.spct", std::ios::binary);
    out << good.substr(0, good.size() - 6);
  }
  CHECK_THROWS_AS(read_tensor(dir.path() / "cut.spct"), CorruptionError);
  CHECK_THROWS_AS(read_tensor_header(dir.path() / "cut.spct"), CorruptionError);
  try {
    read_tensor(dir.path() / "nope.spct");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("nope.spct") != std::string::npos);
  }
}

TEST_CASE("split sizes") {
  CHECK(split_counts(22) == std::array<int, 3>{12, 2, 8});
  CHECK(split_counts(10) == std::array<int, 3>{5, 1, 4});
  CHECK(split_counts(3) == std::array<int, 3>{1, 1, 1});
  for (int n = 3; n <= 60; ++n) {
    const auto c = split_counts(n);
    CHECK(c[0] + c[1] + c[2] == n);
    CHECK(c[2] == n * 4 / 10);
    CHECK(c[1] >= 1);
    CHECK(c[0] >= 1);
  }
}

TEST_CASE("split assignment is a deterministic partition") {
  const auto subjects = ids(22);
  const auto a = assign_splits(subjects, 7);
  std::array<int, 3> counts{};
  for (const auto& [id, split] : a) ++counts[static_cast<int>(split)];
  CHECK(counts == std::array<int, 3>{12, 2, 8});
  CHECK(a.size() == 22);
  CHECK(assign_splits(subjects, 7) == a);
  auto reversed = subjects;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(assign_splits(reversed, 7) == a);  // input order does not matter
  bool differs = false;
  for (std::uint64_t seed = 8; seed < 12 && !differs; ++seed) differs = assign_splits(subjects, seed) != a;
  CHECK(differs);
  CHECK_THROWS_AS(assign_splits(ids(2), 1), InvalidInput);
  CHECK_THROWS_AS(assign_splits({"A", "A", "B"}, 1), InvalidInput);
  for (Split s : {Split::train, Split::validation, Split::test}) CHECK(split_from_string(to_string(s)) == s);
}

TEST_CASE("manifest round trip and verification") {
  testing_support::TempDir dir("manifest");
  DatasetManifest m;
  m.split_seed = 99;
  m.subjects = {{"S01", Split::test}, {"S02", std::nullopt}};
  write_tensor(dir.path() / "full.spct", Tensor({4, 6, 6}));
  write_tensor(dir.path() / "in.spct", Tensor({6, 6, 3}));
  write_tensor(dir.path() / "tg.spct", Tensor({6, 6, 1}));
  CaseEntry c;
  c.subject = "S01";
  c.geometry = BeamKind::fan;
  c.window = parse_window("2048x0");
  c.shape = {6, 6, 4};
  c.full_views = 256;
  c.full = {"full.spct", {4, 6, 6}, "full"};
  c.sparse[32] = {"full.spct", {4, 6, 6}, "sparse"};
  c.residual[32] = {"full.spct", {4, 6, 6}, "residual"};
  m.upsert_case(c);
  SampleEntry s;
  s.id = "S01-fan-v032-2d3ch-z0001";
  s.subject = "S01";
  s.geometry = BeamKind::fan;
  s.views = 32;
  s.mode = "2d3ch";
  s.input = {"in.spct", {6, 6, 3}, "input-2d3ch"};
  s.target = {"tg.spct", {6, 6, 1}, "target"};
  s.slice = 1;
  m.replace_samples("2d3ch", {s});

  save_manifest(dir.path() / "manifest.json", m);
  const DatasetManifest back = load_manifest(dir.path() / "manifest.json");
  CHECK(to_json(back) == to_json(m));
  CHECK(back.subject("S01")->split == Split::test);
  CHECK_FALSE(back.subject("S02")->split.has_value());
  REQUIRE(back.find_case("S01", BeamKind::fan) != nullptr);
  CHECK(back.find_case("S01", BeamKind::fan)->sparse.at(32).path == "full.spct");
  CHECK(back.find_case("S01", BeamKind::cone) == nullptr);
  CHECK(verify_manifest(back, dir.path()).empty());

  // upsert replaces rather than duplicates
  m.upsert_case(c);
  CHECK(m.cases.size() == 1);

  DatasetManifest broken = back;
  broken.samples[0].target.shape = {5, 6, 1};
  broken.subjects.push_back({"S01", std::nullopt});
  broken.cases[0].full.path = "gone.spct";
  const auto problems = verify_manifest(broken, dir.path());
  CHECK(problems.size() >= 3);

  CHECK(same_spatial_shape({6, 6, 3}, {6, 6, 1}));
  CHECK_FALSE(same_spatial_shape({6, 6, 3}, {6, 5, 3}));
  CHECK_FALSE(same_spatial_shape({6, 6, 3}, {6, 6, 6, 1}));

  CHECK_THROWS_AS(manifest_from_json(nlohmann::json{{"format", "other"}}), FormatError);
  {
    std::ofstream out(dir.path() / "junk.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_manifest(dir.path() / "junk.json"), FormatError);
}
