// dfd: depth from defocus from the command line.
//
//   dfd curves                      blur-measure curve table
//   dfd synth --planes SPEC         synthetic original/defocused/ground-truth triple
//   dfd dfd ORIG DEFOCUSED [--gt]   depth map from a defocus pair
//   dfd eval DATASET                batch evaluation over a manifest
//   dfd measure ORIG DEFOCUSED      per-point blur estimates as CSV
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 validation.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "dfd/dfd.hpp"

namespace fs = std::filesystem;
using namespace dfd;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kValidation = 3 };

struct Options {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::string texture;
  std::string planes;
  std::string original;
  std::string defocused;
  std::string gt;
  std::string dataset;
};

void add_config_options(CLI::App& cmd, Options& opt) {
  cmd.add_option("--config", opt.config_path, "key=value config file; flags override it");
  for (const auto& k : config::keys()) {
    cmd.add_option_function<std::string>(
        "--" + k.name, [&opt, name = k.name](const std::string& v) { opt.overrides[name] = v; },
        k.help + " [default: " + config::default_text(k.name) + "]");
  }
}

config::RunConfig resolve(const Options& opt) {
  config::RunConfig cfg;
  if (!opt.config_path.empty()) config::apply_file(cfg, opt.config_path);
  if (const char* env = std::getenv(std::string(config::kOutDirEnv).c_str()); env && *env) {
    cfg.out_dir = env;
  }
  for (const auto& [key, value] : opt.overrides) config::set_value(cfg, key, value);
  cfg.validate();
  return cfg;
}

fs::path prepare_out_dir(const config::RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec || !fs::is_directory(cfg.out_dir)) {
    throw IoError(cfg.out_dir.string() + ": cannot create output directory");
  }
  io::save_text(config::resolved_text(cfg), cfg.out_dir / "config.resolved");
  return cfg.out_dir;
}

std::string coverage_lines(const pipeline::Coverage& c) {
  std::ostringstream o;
  o << "edge_pixels=" << c.edge_pixels << '\n'
    << "valid_points=" << c.valid_points << '\n'
    << "measure_failures=" << c.measure_failures << '\n'
    << "covered_superpixels=" << c.covered_cells << '\n'
    << "total_superpixels=" << c.total_cells << '\n'
    << "valid_pixel_fraction=" << experiment::format_sig(c.valid_pixel_fraction()) << '\n'
    << "covered_superpixel_fraction=" << experiment::format_sig(c.covered_cell_fraction()) << '\n'
    << "clamped_points=" << c.clamped << '\n'
    << "negative_discriminant_points=" << c.negative_discriminant << '\n';
  return o.str();
}

int cmd_curves(const Options& opt) {
  const auto cfg = resolve(opt);
  const auto grid = blur::uniform_grid(cfg.curve_start, cfg.curve_stop, cfg.curve_step);
  std::ostringstream table;
  experiment::emit_curves(grid, cfg.sigma1, table);
  const auto dir = prepare_out_dir(cfg);
  io::save_text(table.str(), dir / "curves.csv");
  std::cout << (dir / "curves.csv").string() << '\n';
  return kOk;
}

int cmd_synth(const Options& opt) {
  const auto cfg = resolve(opt);
  const auto planes = experiment::parse_plane_spec(opt.planes);
  GrayImage texture;
  if (opt.texture.empty()) {
    experiment::EdgeGridSpec spec;
    spec.width = spec.height = cfg.texture_size;
    spec.block = cfg.texture_block;
    spec.subjective_blur = cfg.subjective_blur;
    spec.seed = cfg.seed;
    texture = experiment::make_edge_grid_texture(spec);
  } else {
    texture = io::load_image(opt.texture);
  }
  const auto [lo, hi] = std::minmax_element(planes.depths.begin(), planes.depths.end());
  const auto cal = cfg.calibration(*lo, *hi);
  const auto grid = cfg.grid.resolve(texture.width(), texture.height());
  const auto scene = experiment::make_synthetic_scene(texture, planes, grid, cal);
  const auto dir = prepare_out_dir(cfg);
  io::save_image(scene.original, dir / "original.pgm", cfg.sample_bits);
  io::save_image(scene.defocused, dir / "defocused.pgm", cfg.sample_bits);
  io::save_depth(scene.ground_truth, dir / "ground_truth.txt");
  std::cout << dir.string() << '\n';
  return kOk;
}

int cmd_dfd(const Options& opt) {
  const auto cfg = resolve(opt);
  const auto original = io::load_image(opt.original);
  const auto defocused = io::load_image(opt.defocused);
  if (!same_size(original, defocused)) {
    throw ValidationError("original and defocused images differ in size");
  }
  const auto grid = cfg.grid.resolve(original.width(), original.height());

  std::optional<io::DepthGrid> gt_raw;
  std::optional<double> gt_lo, gt_hi;
  if (!opt.gt.empty()) {
    gt_raw = io::load_depth_grid(opt.gt);
    const auto cal0 = experiment::calibration_for(*gt_raw, cfg.eval_config());
    gt_lo = cal0.d_min;
    gt_hi = cal0.d_max;
  }
  const auto cal = cfg.calibration(gt_lo, gt_hi);
  const auto est = pipeline::estimate_depth_map(original, defocused, grid, cal,
                                                cfg.pipeline_config());

  std::ostringstream report;
  report << coverage_lines(est.coverage);
  report << "d_min=" << experiment::format_sig(cal.d_min) << '\n'
         << "d_max=" << experiment::format_sig(cal.d_max) << '\n';
  if (gt_raw) {
    const auto gt = pipeline::sanitize_ground_truth(gt_raw->rows, gt_raw->cols, gt_raw->values,
                                                    cal.d_min);
    pipeline::require_matches(gt.depth, grid);
    report << "mare=" << experiment::format_report_value(experiment::mare(est.depth, gt.depth))
           << '\n'
           << "mare_covered="
           << experiment::format_report_value(
                  experiment::mare_over(est.depth, gt.depth, est.covered))
           << '\n'
           << "ground_truth_clamped_cells=" << gt.clamped << '\n'
           << "reference_mare=" << experiment::format_sig(experiment::kReferenceMare) << '\n';
  }
  const auto dir = prepare_out_dir(cfg);
  io::save_depth(est.depth, dir / "depth.txt");
  io::save_pgm_visualization(est.depth, cal.d_min, cal.d_max, dir / "depth_vis.pgm",
                             grid.cell_width, grid.cell_height);
  io::save_text(report.str(), dir / "report.txt");
  std::cout << report.str();
  return kOk;
}

int cmd_eval(const Options& opt) {
  const auto cfg = resolve(opt);
  fs::path manifest = opt.dataset;
  if (fs::is_directory(manifest)) manifest /= "manifest.txt";
  const auto entries = experiment::load_manifest(manifest);
  const auto dir = prepare_out_dir(cfg);
  const auto report = experiment::batch_eval(
      entries, cfg.eval_config(), [&dir](const experiment::SceneOutcome& o) {
        io::save_depth(o.estimate.depth, dir / (o.result.id + "_depth.txt"));
        io::save_pgm_visualization(o.estimate.depth, o.result.d_min, o.result.d_max,
                                   dir / (o.result.id + "_vis.pgm"));
      });
  const std::string text = experiment::format_report(report);
  io::save_text(text, dir / "report.txt");
  std::cout << text;
  for (const auto& f : report.failures) std::cerr << "dfd eval: " << f << '\n';
  return report.failures.empty() ? kOk : kValidation;
}

int cmd_measure(const Options& opt) {
  const auto cfg = resolve(opt);
  const auto original = io::load_image(opt.original);
  const auto defocused = io::load_image(opt.defocused);
  const auto grid = cfg.grid.resolve(original.width(), original.height());
  const auto cal = cfg.calibration();
  const auto est = pipeline::estimate_depth_map(original, defocused, grid, cal,
                                                cfg.pipeline_config());
  using experiment::format_sig;
  std::ostringstream csv;
  csv << "x,y,normal_angle,m1,m2,sigma1_hat,sigma2_hat,sigma_obj,depth,clamped,"
         "negative_discriminant\n";
  for (const auto& e : est.points) {
    csv << e.point.x << ',' << e.point.y << ',' << format_sig(e.point.normal_angle) << ','
        << format_sig(e.m1) << ',' << format_sig(e.m2) << ',' << format_sig(e.sigma1_hat) << ','
        << format_sig(e.sigma2_hat) << ',' << format_sig(e.sigma_obj) << ','
        << format_sig(e.depth_hat) << ',' << (e.clamped ? 1 : 0) << ','
        << (e.negative_discriminant ? 1 : 0) << '\n';
  }
  const auto dir = prepare_out_dir(cfg);
  io::save_text(csv.str(), dir / "points.csv");
  std::cout << (dir / "points.csv").string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth from defocus with the exact discrete M_Gd blur measure"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 usage, 2 I/O, 3 validation. Output directory: out_dir, "
             "then $DFD_OUT_DIR, then --out_dir.");
  Options opt;

  auto* curves = app.add_subcommand("curves", "write curves.csv: sigma, R_G, R_Gd, M_Gd, E_RG");
  add_config_options(*curves, opt);

  auto* synth = app.add_subcommand(
      "synth", "write original.pgm, defocused.pgm and ground_truth.txt for a plane scene");
  add_config_options(*synth, opt);
  synth->add_option("--texture", opt.texture,
                    "texture image (PGM/PNG); default: generated edge grid");
  synth->add_option("--planes", opt.planes, "plane depths, e.g. vertical:1,2,4")->required();

  auto* dfd_cmd = app.add_subcommand("dfd", "estimate a depth map from an image and its defocused copy");
  add_config_options(*dfd_cmd, opt);
  dfd_cmd->add_option("original", opt.original, "focused image")->required();
  dfd_cmd->add_option("defocused", opt.defocused, "defocused image")->required();
  dfd_cmd->add_option("--gt", opt.gt, "ground-truth depth text; adds MARE to the report");

  auto* eval = app.add_subcommand("eval", "batch evaluation over a manifest of id image depth");
  add_config_options(*eval, opt);
  eval->add_option("dataset", opt.dataset, "manifest file, or directory holding manifest.txt")
      ->required();

  auto* measure = app.add_subcommand("measure", "write per-point blur estimates to points.csv");
  add_config_options(*measure, opt);
  measure->add_option("original", opt.original, "focused image")->required();
  measure->add_option("defocused", opt.defocused, "defocused image")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*curves) return cmd_curves(opt);
    if (*synth) return cmd_synth(opt);
    if (*dfd_cmd) return cmd_dfd(opt);
    if (*eval) return cmd_eval(opt);
    if (*measure) return cmd_measure(opt);
  } catch (const IoError& e) {
    std::cerr << "dfd: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "dfd: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "dfd: " << e.what() << '\n';
    return kValidation;
  }
  return kUsage;
}
