#ifndef DFD_EXPERIMENT_HPP
#define DFD_EXPERIMENT_HPP

// Evaluation harness: depth-map error metrics, synthetic scenes, blur-measure
// curve tables, dataset manifests and batch evaluation with key=value reports.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dfd/blur_math.hpp"
#include "dfd/errors.hpp"
#include "dfd/image_ops.hpp"
#include "dfd/io.hpp"
#include "dfd/pipeline.hpp"
#include "dfd/raster.hpp"

namespace dfd::experiment {

// Make3D geometry: 2272x1704 images, 55x305 depth cells of 41x5 pixels
// covering the central 2256x1526 region.
inline constexpr int kMake3dImageWidth = 2272;
inline constexpr int kMake3dImageHeight = 1704;
inline constexpr int kMake3dCellWidth = 41;
inline constexpr int kMake3dCellHeight = 5;
inline constexpr int kMake3dCols = 55;
inline constexpr int kMake3dRows = 305;

// Published figures used as comparison constants in reports.
inline constexpr double kReferenceMare = 0.275;
inline constexpr double kReferenceValidPixelFractionMax = 0.06;
inline constexpr double kReferenceCoveredCellFractionMin = 0.57;

inline pipeline::SuperpixelGrid make3d_grid() {
  // the 55x305 depth grid does not fill the image; it is centred with the remainder floored
  return {kMake3dCellWidth,
          kMake3dCellHeight,
          (kMake3dImageWidth - kMake3dCols * kMake3dCellWidth) / 2,
          (kMake3dImageHeight - kMake3dRows * kMake3dCellHeight) / 2,
          kMake3dCols,
          kMake3dRows};
}

namespace detail {

inline void require_same_shape(const pipeline::DepthMap& a, const pipeline::DepthMap& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("depth maps differ in size: " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
}

}  // namespace detail

/// Mean over cells of |est - gt| / gt.
inline double mare(const pipeline::DepthMap& est, const pipeline::DepthMap& gt) {
  detail::require_same_shape(est, gt);
  const auto e = est.values();
  const auto g = gt.values();
  if (g.empty()) throw ValidationError("empty depth map");
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0)) throw ValidationError("ground-truth depth must be > 0");
    sum += std::abs(e[i] - g[i]) / g[i];
  }
  return sum / static_cast<double>(g.size());
}

/// mare restricted to cells whose flag is set; NaN when none is.
inline double mare_over(const pipeline::DepthMap& est, const pipeline::DepthMap& gt,
                        const std::vector<bool>& cells) {
  detail::require_same_shape(est, gt);
  if (cells.size() != gt.values().size()) throw ValidationError("cell mask size mismatch");
  const auto e = est.values();
  const auto g = gt.values();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!cells[i]) continue;
    sum += std::abs(e[i] - g[i]) / g[i];
    ++n;
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Synthetic images

/// Gaussian step edge sampled at pixel centres: the edge passes through (cx, cy) and
/// intensity rises from `lo` to `hi` along `normal_angle`.
inline GrayImage render_step_edge(int width, int height, double normal_angle, double sigma,
                                  double cx, double cy, double lo = 0.0, double hi = 1.0) {
  const blur::StepEdgeModel model{lo, hi, sigma};
  model.validate();
  const double c = std::cos(normal_angle);
  const double s = std::sin(normal_angle);
  Raster<double> r(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      r(x, y) = blur::step_edge_profile((x - cx) * c + (y - cy) * s, model);
  return GrayImage(std::move(r));
}

/// Vertical ideal step: columns < `edge_col` at `lo`, the rest at `hi`. The
/// discontinuity sits on the pixel boundary at edge_col - 1/2.
inline GrayImage ideal_step(int width, int height, int edge_col, double lo = 0.0,
                            double hi = 1.0) {
  Raster<double> r(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) r(x, y) = x < edge_col ? lo : hi;
  return GrayImage(std::move(r));
}

/// Portable uniform double in [0, 1) from a 64-bit engine.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct EdgeGridSpec {
  int width = 512;
  int height = 512;
  int block = 48;               // block side, pixels; edges sit on pixel centres
  double subjective_blur = 0.8; // sigma_s of the rendered edges
  double jitter = 0.1;          // random offset of each block intensity
  std::uint64_t seed = 1;

  void validate() const {
    if (width < 8 || height < 8) throw ValidationError("edge grid must be at least 8x8");
    if (block < 4) throw ValidationError("edge grid block must be >= 4 pixels");
    if (!(subjective_blur >= 0.0)) throw ValidationError("subjective blur must be >= 0");
    if (!(jitter >= 0.0 && jitter < 0.25)) throw ValidationError("jitter must be in [0, 0.25)");
  }
};

/// Blocks of alternating dark/bright intensity (0.25 / 0.75 +- jitter) whose
/// straight edges carry an erf profile of width `subjective_blur`. Away from
/// block corners every edge is an isolated Gaussian step.
inline GrayImage make_edge_grid_texture(const EdgeGridSpec& spec) {
  spec.validate();
  const int nbx = (spec.width + spec.block - 1) / spec.block;
  const int nby = (spec.height + spec.block - 1) / spec.block;
  std::mt19937_64 rng(spec.seed);
  std::vector<double> level(static_cast<std::size_t>(nbx) * nby);
  for (int j = 0; j < nby; ++j)
    for (int i = 0; i < nbx; ++i) {
      const double base = ((i + j) % 2 == 0) ? 0.25 : 0.75;
      level[static_cast<std::size_t>(j) * nbx + i] =
          base + spec.jitter * (2.0 * unit_uniform(rng) - 1.0);
    }

  // Per-coordinate partition of unity over blocks: weight of block k at pixel
  // coordinate t is Phi((t - e_k)/s) - Phi((t - e_{k+1})/s), with outer edges at
  // infinity. Only blocks with non-negligible weight are kept.
  auto step = [&](double t) {
    if (spec.subjective_blur <= 0.0) return t > 0.0 ? 1.0 : (t < 0.0 ? 0.0 : 0.5);
    return 0.5 * (1.0 + blur::erf(t / (std::numbers::sqrt2 * spec.subjective_blur)));
  };
  struct Weight {
    int block;
    double w;
  };
  auto weights = [&](int n, int count) {
    std::vector<std::vector<Weight>> out(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
      for (int k = 0; k < count; ++k) {
        const double left = k == 0 ? 1.0 : step(t - static_cast<double>(k * spec.block));
        const double right =
            k == count - 1 ? 0.0 : step(t - static_cast<double>((k + 1) * spec.block));
        const double w = left - right;
        if (w > 1e-15) out[static_cast<std::size_t>(t)].push_back({k, w});
      }
    }
    return out;
  };
  const auto wx = weights(spec.width, nbx);
  const auto wy = weights(spec.height, nby);

  Raster<double> r(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      double v = 0.0;
      for (const auto& b : wy[static_cast<std::size_t>(y)])
        for (const auto& a : wx[static_cast<std::size_t>(x)])
          v += b.w * a.w * level[static_cast<std::size_t>(b.block) * nbx + a.block];
      r(x, y) = v;
    }
  return GrayImage(std::move(r));
}

enum class PlaneLayout { vertical, horizontal };

/// Equal strips of constant depth: vertical strips run top to bottom and are
/// ordered left to right; horizontal strips are ordered top to bottom.
struct PlaneSpec {
  PlaneLayout layout = PlaneLayout::vertical;
  std::vector<double> depths;
};

/// "vertical:1,2,4" or "horizontal:1.5,3".
inline PlaneSpec parse_plane_spec(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ValidationError("plane spec '" + std::string(text) +
                          "' must look like vertical:D1,D2,... or horizontal:D1,D2,...");
  }
  PlaneSpec spec;
  const auto kind = text.substr(0, colon);
  if (kind == "vertical") {
    spec.layout = PlaneLayout::vertical;
  } else if (kind == "horizontal") {
    spec.layout = PlaneLayout::horizontal;
  } else {
    throw ValidationError("unknown plane layout '" + std::string(kind) + "'");
  }
  auto rest = text.substr(colon + 1);
  while (true) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size() ||
        !(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("plane depth '" + std::string(item) + "' is not a positive number");
    }
    spec.depths.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return spec;
}

/// Plane index of each cell, by the position of the cell centre.
inline std::vector<int> plane_labels(const PlaneSpec& spec, const pipeline::SuperpixelGrid& grid,
                                     int width, int height) {
  if (spec.depths.empty()) throw ValidationError("plane spec has no depths");
  grid.require_fits(width, height);
  const int n = static_cast<int>(spec.depths.size());
  std::vector<int> labels(grid.cell_count());
  for (int row = 0; row < grid.rows; ++row)
    for (int col = 0; col < grid.cols; ++col) {
      const double cx = grid.origin_x + (col + 0.5) * grid.cell_width;
      const double cy = grid.origin_y + (row + 0.5) * grid.cell_height;
      const double t = spec.layout == PlaneLayout::vertical ? cx / width : cy / height;
      labels[static_cast<std::size_t>(row) * grid.cols + col] =
          std::clamp(static_cast<int>(t * n), 0, n - 1);
    }
  return labels;
}

struct SyntheticScene {
  GrayImage original;
  GrayImage defocused;
  pipeline::DepthMap ground_truth;
};

inline SyntheticScene make_synthetic_scene(const GrayImage& texture, const PlaneSpec& planes,
                                           const pipeline::SuperpixelGrid& grid,
                                           const pipeline::Calibration& cal) {
  const auto labels = plane_labels(planes, grid, texture.width(), texture.height());
  std::vector<double> depth(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    depth[i] = planes.depths[static_cast<std::size_t>(labels[i])];
  }
  pipeline::DepthMap gt(grid.rows, grid.cols, std::move(depth));
  GrayImage defocused = pipeline::simulate_defocus(texture, gt, grid, cal);
  return {texture, std::move(defocused), std::move(gt)};
}

// ---------------------------------------------------------------------------
// Curve tables

inline constexpr int kCurveDigits = 9;

inline std::string format_sig(double v, int digits = kCurveDigits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 48> buf{};
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, digits);
  return std::string(buf.data(), res.ptr);
}

inline double round_sig(double v, int digits = kCurveDigits) {
  if (!std::isfinite(v)) return v;
  const std::string s = format_sig(v, digits);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

inline constexpr std::string_view kCurveHeader = "sigma,rg,rgd,mgd,erg";

/// Writes the table as CSV with 9 significant digits; infinite errors as `inf`.
inline void emit_curves(std::span<const blur::CurveRow> rows, std::ostream& out) {
  out << kCurveHeader << '\n';
  for (const auto& r : rows) {
    out << format_sig(r.sigma) << ',' << format_sig(r.rg) << ',' << format_sig(r.rgd) << ','
        << format_sig(r.mgd) << ',' << format_sig(r.erg) << '\n';
  }
  if (!out) throw IoError("failed writing curve table");
}

inline std::vector<blur::CurveRow> emit_curves(std::span<const double> sigma_grid, double sigma1,
                                               std::ostream& out) {
  auto rows = blur::curve_table(sigma_grid, sigma1);
  emit_curves(rows, out);
  return rows;
}

inline std::vector<blur::CurveRow> parse_curves(std::istream& in, const std::string& origin = "curves") {
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line) || line != kCurveHeader) {
    throw IoError(origin + ":1:1: expected header '" + std::string(kCurveHeader) + "'");
  }
  std::vector<blur::CurveRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 5> v{};
    std::size_t pos = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::size_t end = k + 1 < v.size() ? line.find(',', pos) : line.size();
      if (end == std::string::npos) {
        throw IoError(origin + ":" + std::to_string(lineno) + ":" + std::to_string(pos + 1) +
                      ": expected 5 comma-separated values");
      }
      const auto res = std::from_chars(line.data() + pos, line.data() + end, v[k]);
      if (res.ec != std::errc() || res.ptr != line.data() + end) {
        throw IoError(origin + ":" + std::to_string(lineno) + ":" + std::to_string(pos + 1) +
                      ": not a number");
      }
      pos = end + 1;
    }
    rows.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Datasets and batch evaluation

struct DatasetEntry {
  std::string id;
  std::filesystem::path image_path;
  std::filesystem::path depth_path;
};

/// Manifest lines are `id image_path depth_path`, paths relative to the
/// manifest's directory; blank lines and lines starting with '#' are skipped.
inline std::vector<DatasetEntry> load_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError(manifest.string() + ": cannot open manifest");
  const auto base = manifest.parent_path();
  std::vector<DatasetEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    DatasetEntry e;
    std::string img, depth, extra;
    if (!(ls >> e.id >> img >> depth) || (ls >> extra)) {
      throw IoError(manifest.string() + ":" + std::to_string(lineno) +
                    ":1: expected 'id image_path depth_path'");
    }
    e.image_path = base / img;
    e.depth_path = base / depth;
    entries.push_back(std::move(e));
  }
  return entries;
}

/// Either a fixed grid or a cell size from which a centred grid is derived per image.
struct GridSpec {
  std::optional<pipeline::SuperpixelGrid> fixed;
  int cell_width = kMake3dCellWidth;
  int cell_height = kMake3dCellHeight;

  [[nodiscard]] pipeline::SuperpixelGrid resolve(int width, int height) const {
    if (fixed) {
      fixed->require_fits(width, height);
      return *fixed;
    }
    return pipeline::SuperpixelGrid::centered(width, height, cell_width, cell_height);
  }

  static GridSpec make3d() { return {make3d_grid(), kMake3dCellWidth, kMake3dCellHeight}; }
};

struct EvalConfig {
  pipeline::PipelineConfig pipeline;
  GridSpec grid = GridSpec::make3d();
  double sigma_min = pipeline::kDefaultSigmaMin;
  double sigma_max = pipeline::kDefaultSigmaMax;
  std::optional<double> d_min;  // unset: smallest positive ground-truth depth
  std::optional<double> d_max;  // unset: largest ground-truth depth
};

struct SceneInput {
  std::string id;
  GrayImage image;
  io::DepthGrid ground_truth;  // raw values; invalid cells are clamped to d_min
};

struct ImageResult {
  std::string id;
  double mare = 0.0;
  double mare_covered = 0.0;  // NaN when no cell is covered
  double valid_pixel_fraction = 0.0;
  double covered_cell_fraction = 0.0;
  std::size_t clamped = 0;
  std::size_t negative_discriminant = 0;
  std::size_t gt_clamped = 0;
  double d_min = 0.0;
  double d_max = 0.0;
};

struct EvalReport {
  std::vector<ImageResult> images;
  std::vector<std::string> failures;  // "id: message"
  double mean_mare = std::numeric_limits<double>::quiet_NaN();
  double mean_mare_covered = std::numeric_limits<double>::quiet_NaN();
  double mean_valid_pixel_fraction = std::numeric_limits<double>::quiet_NaN();
  double mean_covered_cell_fraction = std::numeric_limits<double>::quiet_NaN();
  std::size_t clamped = 0;
  std::size_t negative_discriminant = 0;
  std::size_t gt_clamped = 0;
};

/// Per-image outputs of a successful evaluation.
struct SceneOutcome {
  ImageResult result;
  pipeline::DepthEstimate estimate;
  pipeline::DepthMap ground_truth;
  GrayImage defocused;
};

inline pipeline::Calibration calibration_for(const io::DepthGrid& gt, const EvalConfig& cfg) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double v : gt.values) {
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double d_min = cfg.d_min.value_or(lo);
  const double d_max = cfg.d_max.value_or(hi);
  if (!std::isfinite(d_min) || !(d_max > 0.0)) {
    throw ValidationError("ground truth has no positive depth to calibrate against");
  }
  return pipeline::fit_calibration(d_min, d_max, cfg.sigma_min, cfg.sigma_max);
}

/// Defocuses one scene by its ground truth, recovers depth and scores it.
inline SceneOutcome evaluate_scene(const SceneInput& scene, const EvalConfig& cfg) {
  const auto grid = cfg.grid.resolve(scene.image.width(), scene.image.height());
  if (scene.ground_truth.rows != grid.rows || scene.ground_truth.cols != grid.cols) {
    throw ValidationError("depth grid " + std::to_string(scene.ground_truth.rows) + "x" +
                          std::to_string(scene.ground_truth.cols) +
                          " does not match superpixel grid " + std::to_string(grid.rows) + "x" +
                          std::to_string(grid.cols));
  }
  const auto cal = calibration_for(scene.ground_truth, cfg);
  auto gt = pipeline::sanitize_ground_truth(scene.ground_truth.rows, scene.ground_truth.cols,
                                            scene.ground_truth.values, cal.d_min);
  GrayImage defocused = pipeline::simulate_defocus(scene.image, gt.depth, grid, cal);
  auto est = pipeline::estimate_depth_map(scene.image, defocused, grid, cal, cfg.pipeline);

  ImageResult r;
  r.id = scene.id;
  r.mare = mare(est.depth, gt.depth);
  r.mare_covered = mare_over(est.depth, gt.depth, est.covered);
  r.valid_pixel_fraction = est.coverage.valid_pixel_fraction();
  r.covered_cell_fraction = est.coverage.covered_cell_fraction();
  r.clamped = est.coverage.clamped;
  r.negative_discriminant = est.coverage.negative_discriminant;
  r.gt_clamped = gt.clamped;
  r.d_min = cal.d_min;
  r.d_max = cal.d_max;
  return {std::move(r), std::move(est), std::move(gt.depth), std::move(defocused)};
}

/// Aggregates per-image results in entry order.
inline void finalize_report(EvalReport& rep) {
  if (rep.images.empty()) return;
  double m = 0.0, mc = 0.0, vf = 0.0, cf = 0.0;
  std::size_t ncov = 0;
  for (const auto& r : rep.images) {
    m += r.mare;
    if (!std::isnan(r.mare_covered)) {
      mc += r.mare_covered;
      ++ncov;
    }
    vf += r.valid_pixel_fraction;
    cf += r.covered_cell_fraction;
    rep.clamped += r.clamped;
    rep.negative_discriminant += r.negative_discriminant;
    rep.gt_clamped += r.gt_clamped;
  }
  const auto n = static_cast<double>(rep.images.size());
  rep.mean_mare = m / n;
  rep.mean_mare_covered = ncov ? mc / static_cast<double>(ncov)
                               : std::numeric_limits<double>::quiet_NaN();
  rep.mean_valid_pixel_fraction = vf / n;
  rep.mean_covered_cell_fraction = cf / n;
}

/// Called with each successful outcome, e.g. to write per-image files.
using OutcomeSink = std::function<void(const SceneOutcome&)>;

inline EvalReport batch_eval(const std::vector<SceneInput>& scenes, const EvalConfig& cfg,
                             const OutcomeSink& sink = {}) {
  if (scenes.empty()) throw ValidationError("batch evaluation needs at least one entry");
  EvalReport rep;
  for (const auto& s : scenes) {
    try {
      auto outcome = evaluate_scene(s, cfg);
      if (sink) sink(outcome);
      rep.images.push_back(std::move(outcome.result));
    } catch (const std::exception& e) {
      rep.failures.push_back(s.id + ": " + e.what());
    }
  }
  finalize_report(rep);
  return rep;
}

/// Loads each entry lazily, so large datasets are not held in memory at once.
inline EvalReport batch_eval(const std::vector<DatasetEntry>& entries, const EvalConfig& cfg,
                             const OutcomeSink& sink = {}) {
  if (entries.empty()) throw ValidationError("batch evaluation needs at least one entry");
  EvalReport rep;
  for (const auto& e : entries) {
    try {
      SceneInput s{e.id, io::load_image(e.image_path), io::load_depth_grid(e.depth_path)};
      auto outcome = evaluate_scene(s, cfg);
      if (sink) sink(outcome);
      rep.images.push_back(std::move(outcome.result));
    } catch (const std::exception& ex) {
      rep.failures.push_back(e.id + ": " + ex.what());
    }
  }
  finalize_report(rep);
  return rep;
}

inline std::string format_report_value(double v) {
  if (std::isnan(v)) return "nan";
  return format_sig(v);
}

/// key=value lines: aggregate figures, published reference figures, then one
/// block per image and one line per failure.
inline std::string format_report(const EvalReport& rep) {
  std::ostringstream o;
  o << "images=" << rep.images.size() << '\n';
  o << "failures=" << rep.failures.size() << '\n';
  o << "mean_mare=" << format_report_value(rep.mean_mare) << '\n';
  o << "mean_mare_covered=" << format_report_value(rep.mean_mare_covered) << '\n';
  o << "mean_valid_pixel_fraction=" << format_report_value(rep.mean_valid_pixel_fraction) << '\n';
  o << "mean_covered_superpixel_fraction=" << format_report_value(rep.mean_covered_cell_fraction)
    << '\n';
  o << "clamped_points=" << rep.clamped << '\n';
  o << "negative_discriminant_points=" << rep.negative_discriminant << '\n';
  o << "ground_truth_clamped_cells=" << rep.gt_clamped << '\n';
  o << "reference_mare=" << format_sig(kReferenceMare) << '\n';
  o << "reference_valid_pixel_fraction_max=" << format_sig(kReferenceValidPixelFractionMax) << '\n';
  o << "reference_covered_superpixel_fraction_min=" << format_sig(kReferenceCoveredCellFractionMin)
    << '\n';
  for (const auto& r : rep.images) {
    const std::string k = "image." + r.id + ".";
    o << k << "mare=" << format_report_value(r.mare) << '\n';
    o << k << "mare_covered=" << format_report_value(r.mare_covered) << '\n';
    o << k << "valid_pixel_fraction=" << format_report_value(r.valid_pixel_fraction) << '\n';
    o << k << "covered_superpixel_fraction=" << format_report_value(r.covered_cell_fraction)
      << '\n';
    o << k << "d_min=" << format_sig(r.d_min) << '\n';
    o << k << "d_max=" << format_sig(r.d_max) << '\n';
    o << k << "clamped_points=" << r.clamped << '\n';
    o << k << "ground_truth_clamped_cells=" << r.gt_clamped << '\n';
  }
  for (std::size_t i = 0; i < rep.failures.size(); ++i) {
    o << "failure." << i << '=' << rep.failures[i] << '\n';
  }
  return o.str();
}

}  // namespace dfd::experiment

#endif  // DFD_EXPERIMENT_HPP
