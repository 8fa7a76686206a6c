#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "dfd/experiment.hpp"
#include "oracles.hpp"

using namespace dfd;
using namespace dfd::experiment;
using pipeline::DepthMap;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("dfd_test_experiment_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SceneInput flat_scene(const std::string& id, double gt_value) {
  return {id, GrayImage::filled(64, 32, 0.5),
          io::DepthGrid{4, 8, std::vector<double>(32, gt_value)}};
}

EvalConfig small_config() {
  EvalConfig cfg;
  cfg.grid = GridSpec{std::nullopt, 8, 8};
  cfg.d_min = 1.0;
  cfg.d_max = 4.0;
  return cfg;
}

}  // namespace

TEST(Mare, TrivialCases) {
  const DepthMap gt(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(mare(gt, gt), 0.0);
  EXPECT_DOUBLE_EQ(mare(DepthMap(2, 2, {2, 4, 6, 8}), gt), 1.0);
  EXPECT_DOUBLE_EQ(mare(DepthMap(2, 2, {1, 2, 6, 8}), gt), 0.5);
  EXPECT_THROW(mare(DepthMap(1, 4, {1, 2, 3, 4}), gt), ValidationError);
}

TEST(Mare, ScaleProperty) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.5, 80.0);
  for (double k : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    std::vector<double> g(50), e(50);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = u(rng);
      e[i] = k * g[i];
    }
    EXPECT_EQ(mare(DepthMap(5, 10, e), DepthMap(5, 10, g)), std::abs(k - 1.0)) << k;
  }
}

TEST(Mare, OverCoveredCells) {
  const DepthMap gt(1, 4, {1, 1, 1, 1});
  const DepthMap est(1, 4, {1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(mare_over(est, gt, {true, true, false, false}), 0.5);
  EXPECT_TRUE(std::isnan(mare_over(est, gt, {false, false, false, false})));
  EXPECT_THROW(mare_over(est, gt, {true}), ValidationError);
}

TEST(PlaneSpec, ParsesAndRejects) {
  const auto p = parse_plane_spec("vertical:1,2.5,4");
  EXPECT_EQ(p.layout, PlaneLayout::vertical);
  EXPECT_EQ(p.depths, (std::vector<double>{1, 2.5, 4}));
  EXPECT_EQ(parse_plane_spec("horizontal:3").layout, PlaneLayout::horizontal);
  for (const char* bad : {"vertical", "diagonal:1,2", "vertical:", "vertical:1,,2",
                          "vertical:1,x", "vertical:-1", "vertical:0", "vertical:1,2,"}) {
    EXPECT_THROW(parse_plane_spec(bad), ValidationError) << bad;
  }
}

TEST(SyntheticScene, TwoHalfPlanes) {
  EdgeGridSpec spec;
  spec.width = spec.height = 64;
  spec.block = 16;
  const auto tex = make_edge_grid_texture(spec);
  const auto grid = pipeline::SuperpixelGrid::centered(64, 64, 8, 8);
  const auto cal = pipeline::fit_calibration(1.0, 10.0);
  const auto scene = make_synthetic_scene(tex, parse_plane_spec("vertical:2,5"), grid, cal);
  const std::set<double> distinct(scene.ground_truth.values().begin(),
                                  scene.ground_truth.values().end());
  EXPECT_EQ(distinct, (std::set<double>{2.0, 5.0}));
  EXPECT_EQ(scene.ground_truth(0, 0), 2.0);
  EXPECT_EQ(scene.ground_truth(7, 7), 5.0);
  const auto rows = make_synthetic_scene(tex, parse_plane_spec("horizontal:2,5"), grid, cal);
  EXPECT_EQ(rows.ground_truth(0, 7), 2.0);
  EXPECT_EQ(rows.ground_truth(7, 0), 5.0);
}

TEST(SyntheticScene, SinglePlaneAtDmin) {
  EdgeGridSpec spec;
  spec.width = spec.height = 48;
  spec.block = 12;
  const auto tex = make_edge_grid_texture(spec);
  const auto grid = pipeline::SuperpixelGrid::centered(48, 48, 8, 8);
  const auto cal = pipeline::fit_calibration(1.0, 10.0);
  const auto scene = make_synthetic_scene(tex, parse_plane_spec("vertical:1"), grid, cal);
  EXPECT_EQ(scene.defocused.pixels(), imaging::convolve_uniform(tex, cal.sigma_min).pixels());
}

TEST(SyntheticScene, GridMismatch) {
  const auto tex = GrayImage::filled(32, 32, 0.5);
  const pipeline::SuperpixelGrid grid{8, 8, 0, 0, 5, 4};
  EXPECT_THROW(make_synthetic_scene(tex, parse_plane_spec("vertical:1,2"), grid,
                                    pipeline::fit_calibration(1.0, 2.0)),
               ValidationError);
}

TEST(Texture, EdgesFollowErfProfile) {
  EdgeGridSpec spec;
  spec.width = spec.height = 128;
  spec.block = 32;
  spec.subjective_blur = 0.8;
  const auto tex = make_edge_grid_texture(spec);
  // horizontal profile across the edge at x = 32, mid-block row
  const double a = tex(0, 16), b = tex(48, 16);
  for (int x = 26; x <= 38; ++x) {
    const double expect = a + (b - a) * static_cast<double>(oracle::phi((x - 32) / 0.8L));
    EXPECT_NEAR(tex(x, 16), expect, 1e-12) << x;
  }
  EXPECT_GE(std::abs(b - a), 0.3);
}

TEST(Texture, DeterministicPerSeed) {
  EdgeGridSpec spec;
  spec.width = spec.height = 64;
  spec.block = 16;
  const auto a = make_edge_grid_texture(spec);
  EXPECT_EQ(a.pixels(), make_edge_grid_texture(spec).pixels());
  spec.seed = 2;
  EXPECT_NE(a.pixels(), make_edge_grid_texture(spec).pixels());
  spec.block = 2;
  EXPECT_THROW(make_edge_grid_texture(spec), ValidationError);
}

TEST(Curves, ReferenceRow) {
  std::ostringstream out;
  const std::vector<double> grid{1.0};
  const auto rows = emit_curves(grid, 1.0, out);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].rg, 1.41421, 1e-5);
  EXPECT_NEAR(rows[0].rgd, static_cast<double>(oracle::rgd(1, 1)), 1e-14);
  EXPECT_NEAR(rows[0].mgd, static_cast<double>(oracle::mgd(1)), 1e-14);
  EXPECT_NEAR(rows[0].erg, static_cast<double>(oracle::erg(1, 1)), 1e-12);
  EXPECT_EQ(out.str(), "sigma,rg,rgd,mgd,erg\n1,1.41421356,1.31160356,1.39814622,0.178262669\n");
}

TEST(Curves, TextRoundTripAtNineDigits) {
  const auto grid = blur::uniform_grid(0.05, 10.0, 0.05);
  std::ostringstream out;
  const auto rows = emit_curves(grid, 1.0, out);
  std::istringstream in(out.str());
  const auto back = parse_curves(in);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].sigma, round_sig(rows[i].sigma));
    EXPECT_EQ(back[i].rg, round_sig(rows[i].rg));
    EXPECT_EQ(back[i].rgd, round_sig(rows[i].rgd));
    EXPECT_EQ(back[i].mgd, round_sig(rows[i].mgd));
    EXPECT_EQ(back[i].erg, round_sig(rows[i].erg));
  }
  // re-emitting the parsed table reproduces the text exactly
  std::ostringstream again;
  emit_curves(back, again);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Curves, InfinityToken) {
  std::ostringstream out;
  const std::vector<double> grid{10.0};
  emit_curves(grid, 1e-9, out);
  EXPECT_NE(out.str().find(",inf\n"), std::string::npos);
  std::istringstream in(out.str());
  EXPECT_TRUE(std::isinf(parse_curves(in)[0].erg));
}

TEST(Curves, ParseErrors) {
  std::istringstream bad_header("sigma,rg\n");
  EXPECT_THROW(parse_curves(bad_header), IoError);
  std::istringstream bad_row("sigma,rg,rgd,mgd,erg\n1,2,3\n");
  EXPECT_THROW(parse_curves(bad_row), IoError);
}

TEST(Manifest, ParsesRelativePaths) {
  const auto dir = temp_dir("manifest");
  std::ofstream(dir / "m.txt") << "# comment\n\na img/a.pgm depth/a.txt\nb b.png b.txt\n";
  const auto entries = load_manifest(dir / "m.txt");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].id, "a");
  EXPECT_EQ(entries[0].image_path, dir / "img/a.pgm");
  EXPECT_EQ(entries[1].depth_path, dir / "b.txt");
  std::ofstream(dir / "bad.txt") << "a b\n";
  EXPECT_THROW(load_manifest(dir / "bad.txt"), IoError);
  EXPECT_THROW(load_manifest(dir / "missing.txt"), IoError);
}

TEST(BatchEval, EmptyIsError) {
  EXPECT_THROW(batch_eval(std::vector<SceneInput>{}, small_config()), ValidationError);
  EXPECT_THROW(batch_eval(std::vector<DatasetEntry>{}, small_config()), ValidationError);
}

TEST(BatchEval, ExactEstimateGivesZero) {
  // no edges: every cell falls back to d_max, which is the ground truth
  const auto rep = batch_eval(std::vector<SceneInput>{flat_scene("flat", 4.0)}, small_config());
  ASSERT_EQ(rep.images.size(), 1u);
  EXPECT_EQ(rep.mean_mare, 0.0);
  EXPECT_EQ(rep.mean_covered_cell_fraction, 0.0);
  EXPECT_TRUE(rep.failures.empty());
}

TEST(BatchEval, MeanOfPerImageAndFailuresRecorded) {
  std::vector<SceneInput> scenes{flat_scene("a", 4.0), flat_scene("b", 2.0),
                                 flat_scene("c", 1.0)};
  scenes.push_back({"broken", GrayImage::filled(64, 32, 0.5), io::DepthGrid{3, 3, {}}});
  const auto rep = batch_eval(scenes, small_config());
  ASSERT_EQ(rep.images.size(), 3u);
  ASSERT_EQ(rep.failures.size(), 1u);
  EXPECT_EQ(rep.failures[0].rfind("broken: ", 0), 0u);
  EXPECT_DOUBLE_EQ(rep.images[1].mare, 1.0);
  EXPECT_DOUBLE_EQ(rep.images[2].mare, 3.0);
  double sum = 0.0;
  for (const auto& r : rep.images) sum += r.mare;
  EXPECT_NEAR(rep.mean_mare, sum / 3.0, 1e-12);
}

TEST(BatchEval, AutoBoundsFromGroundTruth) {
  EvalConfig cfg = small_config();
  cfg.d_min.reset();
  cfg.d_max.reset();
  io::DepthGrid gt{4, 8, std::vector<double>(32, 3.0)};
  gt.values[0] = 1.5;
  gt.values[1] = 0.0;  // invalid range reading
  const auto rep = batch_eval(std::vector<SceneInput>{{"x", GrayImage::filled(64, 32, 0.5), gt}}, cfg);
  ASSERT_EQ(rep.images.size(), 1u);
  EXPECT_EQ(rep.images[0].d_min, 1.5);
  EXPECT_EQ(rep.images[0].d_max, 3.0);
  EXPECT_EQ(rep.gt_clamped, 1u);
}

TEST(BatchEval, ReportKeys) {
  const auto rep = batch_eval(std::vector<SceneInput>{flat_scene("only", 4.0)}, small_config());
  const auto text = format_report(rep);
  for (const char* key : {"images=1\n", "failures=0\n", "mean_mare=0\n", "reference_mare=0.275\n",
                          "reference_valid_pixel_fraction_max=0.06\n",
                          "reference_covered_superpixel_fraction_min=0.57\n",
                          "image.only.mare=0\n"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(BatchEval, FromManifestFiles) {
  const auto dir = temp_dir("batch");
  io::save_image(GrayImage::filled(64, 32, 0.5), dir / "a.pgm");
  io::save_depth(DepthMap::filled(4, 8, 4.0), dir / "a.txt");
  std::ofstream(dir / "manifest.txt") << "a a.pgm a.txt\nmissing none.pgm none.txt\n";
  std::vector<std::string> seen;
  const auto rep = batch_eval(load_manifest(dir / "manifest.txt"), small_config(),
                              [&](const SceneOutcome& o) { seen.push_back(o.result.id); });
  EXPECT_EQ(seen, std::vector<std::string>{"a"});
  EXPECT_EQ(rep.images.size(), 1u);
  EXPECT_EQ(rep.failures.size(), 1u);
}

TEST(BatchEval, DeterministicOnSyntheticScene) {
  EdgeGridSpec spec;
  spec.width = spec.height = 128;
  spec.block = 32;
  const auto tex = make_edge_grid_texture(spec);
  const auto grid = pipeline::SuperpixelGrid::centered(128, 128, 8, 2);
  const auto cal = pipeline::fit_calibration(1.0, 10.0);
  const auto scene = make_synthetic_scene(tex, parse_plane_spec("vertical:1.5,3"), grid, cal);
  SceneInput in{"s", tex, io::DepthGrid{grid.rows, grid.cols,
                                        std::vector<double>(scene.ground_truth.values().begin(),
                                                            scene.ground_truth.values().end())}};
  EvalConfig cfg;
  cfg.grid = GridSpec{std::nullopt, 8, 2};
  cfg.d_min = 1.0;
  cfg.d_max = 10.0;
  const auto a = format_report(batch_eval(std::vector<SceneInput>{in}, cfg));
  const auto b = format_report(batch_eval(std::vector<SceneInput>{in}, cfg));
  EXPECT_EQ(a, b);
}
