#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sparsect/commands.hpp"
#include "sparsect/phantom.hpp"
#include "support.hpp"

using namespace sparsect;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Path, size and content of every file below root.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

// Three small subjects simulated with a parallel beam and split.
struct Pipeline {
  testing_support::TempDir dir{"cli"};
  fs::path dataset;

  explicit Pipeline(BeamKind kind = BeamKind::parallel) {
    dataset = dir.path() / "data";
    for (int s = 1; s <= 3; ++s) {
      PhantomConfig pc;
      pc.subject = "S0" + std::to_string(s);
      pc.size = 32;
      pc.slices = 12;
      pc.seed = static_cast<std::uint64_t>(s);
      pc.out = dataset;
      SimulateConfig sc;
      sc.input = cmd_phantom(pc);
      sc.subject = pc.subject;
      sc.geometry = kind;
      sc.full_views = 256;
      sc.out = dataset;
      cmd_simulate(sc);
    }
    cmd_split({dataset, 3});
  }

  void extract(const std::string& mode) const { cmd_extract({dataset, mode, 16, 4}); }

  // Predictions equal to `factor` times the targets, for one mode.
  [[nodiscard]] fs::path scaled_predictions(const std::string& mode, float factor) const {
    const fs::path out = dir.path() / ("pred-" + mode);
    fs::create_directories(out);
    const DatasetManifest m = load_manifest(dataset / kManifestName);
    for (const SampleEntry& s : m.samples) {
      if (s.mode != mode) continue;
      TensorFile t = read_tensor(dataset / s.target.path);
      for (float& x : t.tensor.values) x *= factor;
      write_tensor(out / (s.id + ".spct"), t.tensor, t.metadata);
    }
    return out;
  }

  std::vector<CaseScores> score(const std::string& mode, const fs::path& preds) const {
    ScoreConfig sc;
    sc.dataset = dataset;
    sc.mode = mode;
    sc.predictions = preds;
    sc.out = dir.path() / ("scores-" + mode);
    return cmd_score(sc);
  }
};

}  // namespace

TEST_CASE("phantom command is deterministic") {
  testing_support::TempDir dir("cli-phantom");
  PhantomConfig pc;
  pc.size = 24;
  pc.slices = 6;
  pc.seed = 4;
  pc.out = dir.path() / "a";
  const fs::path a = cmd_phantom(pc);
  pc.out = dir.path() / "b";
  const fs::path b = cmd_phantom(pc);
  CHECK(slurp(a) == slurp(b));
  CHECK(read_volume(a).shape() == Shape3{24, 24, 6});
  CHECK(fs::exists(dir.path() / "a" / "phantoms" / "S00_specs.json"));
}

TEST_CASE("empty phantom simulates to zero residuals") {
  testing_support::TempDir dir("cli-air");
  const fs::path input = dir.path() / "air.spct";
  write_volume(input, VoxelVolume({20, 20, 3}, {}, Unit::hu, kAirHu));
  SimulateConfig sc;
  sc.input = input;
  sc.subject = "AIR";
  sc.geometry = BeamKind::fan;
  sc.full_views = 128;
  sc.views = {32, 64};
  sc.out = dir.path() / "data";
  const CaseEntry c = cmd_simulate(sc);
  CHECK(c.sparse.size() == 2);
  for (const auto& [views, ref] : c.residual) {
    const VoxelVolume r = read_volume(sc.out / ref.path);
    for (float x : r.values()) CHECK(x == 0.0f);
  }
  sc.views = {48};
  CHECK_THROWS_AS(cmd_simulate(sc), InvalidInput);
}

TEST_CASE("pipeline: manifest, samples, oracle and zero scoring") {
  const Pipeline p;
  const DatasetManifest m = load_manifest(p.dataset / kManifestName);
  REQUIRE(m.cases.size() == 3);
  for (const CaseEntry& c : m.cases) {
    CHECK(c.sparse.size() == 3);
    CHECK(c.residual.size() == 3);
    CHECK(fs::exists(p.dataset / c.full.path));
    CHECK(fs::exists(p.dataset / c.full.path.substr(0, c.full.path.rfind('/')) / "summary.tsv"));
  }
  CHECK(m.split_seed == 3u);
  for (const SubjectEntry& s : m.subjects) CHECK(s.split.has_value());

  for (const std::string mode : {"2d", "2d3ch", "25d", "3d", "patch-coronal"}) {
    CAPTURE(mode);
    CHECK(cmd_extract({p.dataset, mode, 16, 4}) > 0);
    const DatasetManifest after = load_manifest(p.dataset / kManifestName);
    CHECK(verify_manifest(after, p.dataset).empty());

    const fs::path oracle = p.dir.path() / ("oracle-" + mode);
    const std::size_t n = cmd_stub_predictions({p.dataset, mode, StubKind::oracle, Split::test, oracle});
    CHECK(n > 0);
    for (const CaseScores& cs : p.score(mode, oracle)) {
      REQUIRE(cs.rows.size() == 3);
      for (const ScoreRow& r : cs.rows) {
        CHECK(r.corrected_mse == 0.0);
        CHECK(r.corrected_ssim == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.sparse_mse > 0.0);
      }
    }

    const fs::path zero = p.dir.path() / ("zero-" + mode);
    cmd_stub_predictions({p.dataset, mode, StubKind::zero, Split::test, zero});
    for (const CaseScores& cs : p.score(mode, zero))
      for (const ScoreRow& r : cs.rows) {
        CHECK(r.corrected_mse == r.sparse_mse);
        CHECK(r.corrected_ssim == r.sparse_ssim);
      }
  }
  const fs::path scores = p.dir.path() / "scores-2d";
  CHECK(fs::exists(scores / "scores_long.tsv"));
  CHECK(fs::exists(scores / "scores_table.tsv"));
  CHECK(fs::exists(scores / "scores.json"));
  CHECK_FALSE(fs::is_empty(scores / "images"));
}

TEST_CASE("block scoring equals slice scoring on the same corrections") {
  const Pipeline p;
  p.extract("2d");
  p.extract("3d");
  const auto slice = p.score("2d", p.scaled_predictions("2d", 0.5f));
  const auto block = p.score("3d", p.scaled_predictions("3d", 0.5f));
  REQUIRE(slice.size() == block.size());
  for (std::size_t c = 0; c < slice.size(); ++c) {
    REQUIRE(slice[c].rows.size() == block[c].rows.size());
    for (std::size_t r = 0; r < slice[c].rows.size(); ++r) {
      CHECK(block[c].rows[r].corrected_mse == doctest::Approx(slice[c].rows[r].corrected_mse).epsilon(1e-12));
      CHECK(block[c].rows[r].corrected_ssim == doctest::Approx(slice[c].rows[r].corrected_ssim).epsilon(1e-12));
      CHECK(block[c].rows[r].corrected_mse < block[c].rows[r].sparse_mse);
    }
  }
}

TEST_CASE("scoring is read-only and needs every prediction") {
  const Pipeline p;
  p.extract("2d");
  const fs::path preds = p.scaled_predictions("2d", 1.0f);
  const auto before = snapshot(p.dataset);
  CHECK_NOTHROW(p.score("2d", preds));
  CHECK(snapshot(p.dataset) == before);

  const DatasetManifest m = load_manifest(p.dataset / kManifestName);
  const auto test_sample = std::find_if(m.samples.begin(), m.samples.end(), [&](const SampleEntry& s) {
    return m.subject(s.subject)->split == Split::test;
  });
  REQUIRE(test_sample != m.samples.end());
  REQUIRE(fs::remove(preds / (test_sample->id + ".spct")));
  CHECK_THROWS_AS(p.score("2d", preds), IncompleteSetError);
  CHECK_THROWS_AS(validate_mode("4d"), InvalidInput);
}

TEST_CASE("graymap writer") {
  testing_support::TempDir dir("pgm");
  VoxelVolume img({3, 2, 1}, {}, Unit::difference, std::vector<float>{-1, 0, 1, 2, 0.5f, 0.25f});
  write_pgm(dir.path() / "a.pgm", img, 0.0, 1.0);
  const std::string bytes = slurp(dir.path() / "a.pgm");
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(bytes.substr(0, header.size()) == header);
  const auto px = [&](int k) { return static_cast<unsigned char>(bytes[header.size() + k]); };
  CHECK(px(0) == 0);
  CHECK(px(2) == 255);
  CHECK(px(3) == 255);
  CHECK(px(4) == 128);
}

#ifdef SPARSECT_CLI_PATH
TEST_CASE("executable end to end") {
  testing_support::TempDir dir("cli-exe");
  const std::string exe = SPARSECT_CLI_PATH;
  const std::string d = dir.path().string();
  auto run = [&](const std::string& args) {
    return std::system((exe + " " + args + " > " + d + "/log.txt 2>&1").c_str());
  };
  for (int s = 1; s <= 3; ++s) {
    const std::string id = "S0" + std::to_string(s);
    REQUIRE(run("phantom --subject " + id + " --size 24 --slices 4 --seed " + std::to_string(s) +
                " --out " + d) == 0);
    REQUIRE(run("simulate --input " + d + "/phantoms/" + id + ".spct --subject " + id +
                " --geometry fan --views 32,64 --full-views 128 --out " + d) == 0);
  }
  CHECK(run("split --seed 1 --out " + d) == 0);
  CHECK(run("extract --mode 2d --out " + d) == 0);
  CHECK(run("stub-predictions --mode 2d --kind oracle --dataset " + d + " --out " + d + "/pred") == 0);
  CHECK(run("score --mode 2d --predictions " + d + "/pred --dataset " + d + " --out " + d +
            "/scores --no-images") == 0);
  const std::string table = slurp(dir.path() / "scores" / "scores_table.tsv");
  CHECK(table.find("fan:2d") != std::string::npos);

  CHECK(run("simulate --input " + d + "/missing.spct --out " + d) != 0);
  CHECK(slurp(dir.path() / "log.txt").rfind("sparsect: ", 0) == 0);
  CHECK(run("extract --mode 4d --out " + d) != 0);
  CHECK(run("frobnicate") != 0);
}
#endif
