// sparsect: phantom -> simulate -> split -> extract -> (train elsewhere) -> score.
#include <charconv>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sparsect/commands.hpp"

using namespace sparsect;

namespace {

std::vector<int> parse_views(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size() || v < 1)
      throw CLI::ValidationError("--views", "expected a comma list of positive integers");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--views", "empty list");
  return out;
}

std::optional<Split> parse_split(const std::string& s) {
  if (s == "all") return std::nullopt;
  return split_from_string(s);
}

const std::vector<std::string> kGeometries = {"parallel", "fan", "cone"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-view CT simulation, sample extraction and scoring"};
  app.require_subcommand(1);

  PhantomConfig ph;
  std::string ph_out = ".";
  auto* phantom = app.add_subcommand("phantom", "Write a synthetic thorax phantom (HU)");
  phantom->add_option("--subject", ph.subject, "Subject id")->capture_default_str();
  phantom->add_option("--size", ph.size, "In-plane voxels (nx = ny)")->capture_default_str();
  phantom->add_option("--slices", ph.slices, "Axial slices (0: same as --size)");
  phantom->add_option("--pitch", ph.pitch, "Voxel pitch in mm")->capture_default_str();
  phantom->add_option("--seed", ph.seed, "Nodule layout seed")->capture_default_str();
  phantom->add_option("--supersample", ph.supersample, "Sub-samples per axis")->capture_default_str();
  phantom->add_option("--specs", ph.specs_path, "Ellipsoid list (JSON) instead of the thorax");
  phantom->add_option("--out", ph_out, "Dataset directory")->capture_default_str();

  SimulateConfig sim;
  std::string sim_geo = "parallel", sim_views = "32,64,128", sim_window = "2048x0";
  std::string sim_filter = "ram-lak", sim_out = ".";
  auto* simulate = app.add_subcommand("simulate", "Full and sparse reconstructions of one case");
  simulate->add_option("--input", sim.input, "HU volume container")->required();
  simulate->add_option("--subject", sim.subject, "Subject id")->capture_default_str();
  simulate->add_option("--geometry", sim_geo, "Beam geometry")
      ->check(CLI::IsMember(kGeometries))
      ->capture_default_str();
  simulate->add_option("--views", sim_views, "Sparse view counts")->capture_default_str();
  simulate->add_option("--full-views", sim.full_views, "Views of the full scan")
      ->capture_default_str();
  simulate->add_option("--window", sim_window, "HU window WIDTHxLEVEL")->capture_default_str();
  simulate->add_option("--filter", sim_filter, "Ramp filter")
      ->check(CLI::IsMember({"ram-lak", "hann"}))
      ->capture_default_str();
  simulate->add_option("--out", sim_out, "Dataset directory")->capture_default_str();

  SplitConfig sp;
  std::string sp_dir = ".";
  auto* split = app.add_subcommand("split", "Assign subjects to train/validation/test");
  split->add_option("--seed", sp.seed, "Shuffle seed")->capture_default_str();
  split->add_option("--out", sp_dir, "Dataset directory")->capture_default_str();

  ExtractConfig ex;
  std::string ex_dir = ".";
  auto* extract = app.add_subcommand("extract", "Write input/target sample pairs");
  extract->add_option("--mode", ex.mode, "Sample layout")
      ->check(CLI::IsMember(kSampleModes))
      ->capture_default_str();
  extract->add_option("--block-size", ex.block_size, "Block edge (voxels)")->capture_default_str();
  extract->add_option("--margin", ex.margin, "Block overlap margin (voxels)")->capture_default_str();
  extract->add_option("--out", ex_dir, "Dataset directory")->capture_default_str();

  StubConfig st;
  std::string st_dir = ".", st_kind = "zero", st_split = "test";
  auto* stub = app.add_subcommand("stub-predictions", "Zero or oracle predictions");
  stub->add_option("--mode", st.mode, "Sample layout")
      ->check(CLI::IsMember(kSampleModes))
      ->capture_default_str();
  stub->add_option("--kind", st_kind, "zero or oracle")
      ->check(CLI::IsMember({"zero", "oracle"}))
      ->capture_default_str();
  stub->add_option("--split", st_split, "Split to cover, or all")
      ->check(CLI::IsMember({"train", "validation", "test", "all"}))
      ->capture_default_str();
  stub->add_option("--dataset", st_dir, "Dataset directory")->capture_default_str();
  stub->add_option("--out", st.out, "Prediction directory")->required();

  ScoreConfig sc;
  std::string sc_dir = ".", sc_split = "test";
  bool no_images = false;
  auto* score = app.add_subcommand("score", "Apply predictions and write MSE/SSIM tables");
  score->add_option("--mode", sc.mode, "Sample layout")
      ->check(CLI::IsMember(kSampleModes))
      ->capture_default_str();
  score->add_option("--predictions", sc.predictions, "Prediction directory")->required();
  score->add_option("--split", sc_split, "Split to score, or all")
      ->check(CLI::IsMember({"train", "validation", "test", "all"}))
      ->capture_default_str();
  score->add_option("--dataset", sc_dir, "Dataset directory")->capture_default_str();
  score->add_option("--out", sc.out, "Score directory")->required();
  score->add_flag("--no-images", no_images, "Skip graymap exports");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*phantom) {
      ph.out = ph_out;
      std::cout << cmd_phantom(ph).string() << '\n';
    } else if (*simulate) {
      sim.geometry = beam_kind_from_string(sim_geo);
      sim.views = parse_views(sim_views);
      sim.window = parse_window(sim_window);
      sim.filter.kind = filter_kind_from_string(sim_filter);
      sim.out = sim_out;
      const CaseEntry c = cmd_simulate(sim);
      std::cout << c.subject << ' ' << to_string(c.geometry) << ": full + " << c.sparse.size()
                << " sparse levels\n";
    } else if (*split) {
      sp.dataset = sp_dir;
      for (const auto& [id, s] : cmd_split(sp)) std::cout << id << '\t' << to_string(s) << '\n';
    } else if (*extract) {
      ex.dataset = ex_dir;
      std::cout << cmd_extract(ex) << " samples (" << ex.mode << ")\n";
    } else if (*stub) {
      st.dataset = st_dir;
      st.kind = st_kind == "zero" ? StubKind::zero : StubKind::oracle;
      st.split = parse_split(st_split);
      std::cout << cmd_stub_predictions(st) << " predictions\n";
    } else if (*score) {
      sc.dataset = sc_dir;
      sc.split = parse_split(sc_split);
      sc.images = !no_images;
      const auto cases = cmd_score(sc);
      const auto agg = aggregate_scores(cases);
      write_scores_table(std::cout, agg);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "sparsect: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
