#ifndef DFD_PIPELINE_HPP
#define DFD_PIPELINE_HPP

// Depth <-> blur calibration, defocus-pair synthesis, relative blur between an
// image and its defocused copy, and per-superpixel depth recovery.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dfd/blur_math.hpp"
#include "dfd/edges.hpp"
#include "dfd/errors.hpp"
#include "dfd/image_ops.hpp"
#include "dfd/raster.hpp"

namespace dfd::pipeline {

inline constexpr double kDefaultSigmaMin = 0.5;
inline constexpr double kDefaultSigmaMax = 10.0;

/// sigma = c + d * ln(D), anchored so that d_min -> sigma_min and d_max -> sigma_max.
struct Calibration {
  double c = 0.0;
  double d = 1.0;
  double sigma_min = kDefaultSigmaMin;
  double sigma_max = kDefaultSigmaMax;
  double d_min = 1.0;
  double d_max = 2.0;
};

inline Calibration fit_calibration(double d_min, double d_max,
                                   double sigma_min = kDefaultSigmaMin,
                                   double sigma_max = kDefaultSigmaMax) {
  if (!(d_min > 0.0) || !std::isfinite(d_max)) {
    throw ValidationError("depth bounds must be finite and > 0");
  }
  if (d_min == d_max) throw ValidationError("degenerate calibration: d_min == d_max");
  if (!(d_min < d_max)) throw ValidationError("calibration requires d_min < d_max");
  if (!(sigma_min < sigma_max)) {
    throw ValidationError("calibration requires sigma_min < sigma_max (slope d must be > 0)");
  }
  if (!(sigma_min >= 0.0)) throw ValidationError("sigma_min must be >= 0");
  Calibration cal;
  cal.d = (sigma_max - sigma_min) / (std::log(d_max) - std::log(d_min));
  cal.c = sigma_min - cal.d * std::log(d_min);
  cal.sigma_min = sigma_min;
  cal.sigma_max = sigma_max;
  cal.d_min = d_min;
  cal.d_max = d_max;
  return cal;
}

struct Clamped {
  double value = 0.0;
  bool clamped = false;
};

inline Clamped depth_to_blur(double depth, const Calibration& cal) {
  if (!std::isfinite(depth)) throw DomainError("depth must be finite");
  if (depth <= cal.d_min) return {cal.sigma_min, depth < cal.d_min};
  if (depth >= cal.d_max) return {cal.sigma_max, depth > cal.d_max};
  return {std::clamp(cal.c + cal.d * std::log(depth), cal.sigma_min, cal.sigma_max), false};
}

/// Inverse of depth_to_blur, exp((sigma - c) / d), clamped to [d_min, d_max].
inline Clamped blur_to_depth(double sigma, const Calibration& cal) {
  if (!std::isfinite(sigma)) throw DomainError("blur must be finite");
  const double depth = std::exp((sigma - cal.c) / cal.d);
  if (depth < cal.d_min) return {cal.d_min, true};
  if (depth > cal.d_max) return {cal.d_max, true};
  return {depth, false};
}

/// Non-overlapping rectangular cells tiling a rectangle inside the image.
struct SuperpixelGrid {
  int cell_width = 1;
  int cell_height = 1;
  int origin_x = 0;
  int origin_y = 0;
  int cols = 1;
  int rows = 1;

  [[nodiscard]] int extent_x() const noexcept { return cell_width * cols; }
  [[nodiscard]] int extent_y() const noexcept { return cell_height * rows; }
  [[nodiscard]] std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows);
  }

  void validate() const {
    if (cell_width < 1 || cell_height < 1 || cols < 1 || rows < 1 || origin_x < 0 ||
        origin_y < 0) {
      throw ValidationError("superpixel grid needs positive cells and counts");
    }
  }

  [[nodiscard]] bool fits(int width, int height) const noexcept {
    return origin_x + extent_x() <= width && origin_y + extent_y() <= height;
  }

  void require_fits(int width, int height) const {
    validate();
    if (!fits(width, height)) {
      throw ValidationError("superpixel grid (" + std::to_string(cols) + "x" +
                            std::to_string(rows) + " cells of " + std::to_string(cell_width) +
                            "x" + std::to_string(cell_height) + " at " +
                            std::to_string(origin_x) + "," + std::to_string(origin_y) +
                            ") does not fit a " + std::to_string(width) + "x" +
                            std::to_string(height) + " image");
    }
  }

  /// (col, row) of the cell containing pixel (x, y), if any.
  [[nodiscard]] std::optional<std::pair<int, int>> cell_of(int x, int y) const noexcept {
    const int rx = x - origin_x;
    const int ry = y - origin_y;
    if (rx < 0 || ry < 0 || rx >= extent_x() || ry >= extent_y()) return std::nullopt;
    return std::pair{rx / cell_width, ry / cell_height};
  }

  /// As many whole cells as fit, centred in the image.
  static SuperpixelGrid centered(int width, int height, int cell_width, int cell_height) {
    if (cell_width < 1 || cell_height < 1) throw ValidationError("cell size must be positive");
    SuperpixelGrid g;
    g.cell_width = cell_width;
    g.cell_height = cell_height;
    g.cols = width / cell_width;
    g.rows = height / cell_height;
    if (g.cols < 1 || g.rows < 1) throw ValidationError("image smaller than one superpixel");
    g.origin_x = (width - g.extent_x()) / 2;
    g.origin_y = (height - g.extent_y()) / 2;
    return g;
  }

  friend bool operator==(const SuperpixelGrid&, const SuperpixelGrid&) = default;
};

/// Depth per superpixel, row-major; every value finite and > 0.
class DepthMap {
 public:
  DepthMap() = default;

  DepthMap(int rows, int cols, std::vector<double> values)
      : cells_(cols, rows, std::move(values)) {
    for (double v : cells_.values()) {
      if (!std::isfinite(v) || !(v > 0.0)) {
        throw ValidationError("depth values must be finite and > 0");
      }
    }
  }

  static DepthMap filled(int rows, int cols, double value) {
    return DepthMap(rows, cols,
                    std::vector<double>(static_cast<std::size_t>(rows) * cols, value));
  }

  [[nodiscard]] int rows() const noexcept { return cells_.height(); }
  [[nodiscard]] int cols() const noexcept { return cells_.width(); }
  double operator()(int row, int col) const noexcept { return cells_(col, row); }
  [[nodiscard]] std::span<const double> values() const noexcept { return cells_.values(); }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  Raster<double> cells_;  // x = col, y = row
};

inline void require_matches(const DepthMap& depth, const SuperpixelGrid& grid) {
  if (depth.rows() != grid.rows || depth.cols() != grid.cols) {
    throw ValidationError("depth map " + std::to_string(depth.rows()) + "x" +
                          std::to_string(depth.cols()) + " does not match grid " +
                          std::to_string(grid.rows) + "x" + std::to_string(grid.cols) +
                          " (rows x cols)");
  }
}

/// Ground truth from raw range data: non-finite, zero or sub-d_min cells are
/// raised to d_min and counted.
struct SanitizedDepth {
  DepthMap depth;
  std::size_t clamped = 0;
};

inline SanitizedDepth sanitize_ground_truth(int rows, int cols, std::span<const double> raw,
                                            double d_min) {
  if (!(d_min > 0.0)) throw ValidationError("d_min must be > 0");
  std::vector<double> v(raw.begin(), raw.end());
  std::size_t n = 0;
  for (double& x : v) {
    if (!std::isfinite(x) || x < d_min) {
      x = d_min;
      ++n;
    }
  }
  return {DepthMap(rows, cols, std::move(v)), n};
}

/// Sigma per pixel from per-cell depth; pixels outside the grid get sigma_min.
inline imaging::SigmaField sigma_field(int width, int height, const DepthMap& gt,
                                       const SuperpixelGrid& grid, const Calibration& cal) {
  grid.require_fits(width, height);
  require_matches(gt, grid);
  Raster<double> s(width, height, cal.sigma_min);
  for (int row = 0; row < grid.rows; ++row)
    for (int col = 0; col < grid.cols; ++col) {
      const double sigma = depth_to_blur(gt(row, col), cal).value;
      const int x0 = grid.origin_x + col * grid.cell_width;
      const int y0 = grid.origin_y + row * grid.cell_height;
      for (int y = y0; y < y0 + grid.cell_height; ++y)
        for (int x = x0; x < x0 + grid.cell_width; ++x) s(x, y) = sigma;
    }
  return imaging::SigmaField(std::move(s), cal.sigma_max);
}

/// Defocused copy of `img` with the blur implied by each cell's depth.
inline GrayImage simulate_defocus(const GrayImage& img, const DepthMap& gt,
                                  const SuperpixelGrid& grid, const Calibration& cal) {
  return imaging::convolve_space_variant(img, sigma_field(img.width(), img.height(), gt, grid, cal));
}

struct RelativeBlur {
  double sigma = 0.0;
  bool negative_discriminant = false;
};

/// sqrt(sigma2^2 - sigma1^2); a negative discriminant yields 0 and is flagged.
inline RelativeBlur relative_blur(double sigma1_hat, double sigma2_hat) {
  if (!(sigma1_hat >= 0.0) || !(sigma2_hat >= 0.0)) {
    throw DomainError("relative blur needs nonnegative blurs");
  }
  const double disc = sigma2_hat * sigma2_hat - sigma1_hat * sigma1_hat;
  if (disc < 0.0) return {0.0, true};
  return {std::sqrt(disc), false};
}

struct BlurEstimate {
  edges::EdgePoint point;
  double m1 = 0.0;  // M_Gd on the original
  double m2 = 0.0;  // M_Gd on the defocused image
  double sigma1_hat = 0.0;
  double sigma2_hat = 0.0;
  double sigma_obj = 0.0;
  double depth_hat = 0.0;
  bool clamped = false;  // either inversion hit the interval range, or depth was clamped
  bool negative_discriminant = false;
};

struct Coverage {
  std::size_t image_pixels = 0;
  std::size_t edge_pixels = 0;      // Canny mask pixels on the original
  std::size_t valid_points = 0;     // points contributing a depth
  std::size_t measure_failures = 0; // validated on the original, unmeasurable on the defocused
  std::size_t total_cells = 0;
  std::size_t covered_cells = 0;
  std::size_t clamped = 0;
  std::size_t negative_discriminant = 0;

  [[nodiscard]] double valid_pixel_fraction() const noexcept {
    return image_pixels ? static_cast<double>(valid_points) / static_cast<double>(image_pixels)
                        : 0.0;
  }
  [[nodiscard]] double covered_cell_fraction() const noexcept {
    return total_cells ? static_cast<double>(covered_cells) / static_cast<double>(total_cells)
                       : 0.0;
  }
};

struct PipelineConfig {
  edges::EdgeConfig edges;
  double inversion_tol = blur::kInversionTolerance;
  double range_slack = blur::kDefaultRangeSlack;
  double monotone_grid_step = blur::kMonotoneGridStep;
};

struct DepthEstimate {
  DepthMap depth;
  std::vector<BlurEstimate> points;  // raster order of the edge points
  std::vector<bool> covered;         // per cell, row-major
  Coverage coverage;
};

/// Inversion interval for M_Gd readings. Nearest-axis sampling sees blur
/// stretched by up to sqrt(2), so its interval extends past sigma_max.
inline blur::MonotoneInterval mgd_interval(const Calibration& cal, const PipelineConfig& cfg) {
  const double hi = cfg.edges.sampling == edges::SamplingMode::nearest_axis
                        ? cal.sigma_max * std::numbers::sqrt2
                        : cal.sigma_max;
  return blur::MonotoneInterval(blur::MeasureKind::mg_discrete(), std::max(cal.sigma_min, 1e-3),
                                hi, cfg.monotone_grid_step);
}

/// Measures every validated edge point of `original` on both images, converts
/// the objective blur to depth and averages depths per superpixel. Cells with no
/// point are set to d_max.
inline DepthEstimate estimate_depth_map(const GrayImage& original, const GrayImage& defocused,
                                        const SuperpixelGrid& grid, const Calibration& cal,
                                        const PipelineConfig& cfg = {}) {
  if (!same_size(original, defocused)) {
    throw ValidationError("original and defocused images differ in size");
  }
  grid.require_fits(original.width(), original.height());

  const edges::EdgeAnalyzer analyzer(original, cfg.edges);
  const blur::MonotoneInterval interval = mgd_interval(cal, cfg);
  const auto mode = cfg.edges.sampling;
  const double floor = cfg.edges.denominator_floor;

  DepthEstimate out;
  Coverage& cov = out.coverage;
  cov.image_pixels = static_cast<std::size_t>(original.width()) * original.height();
  cov.total_cells = grid.cell_count();

  std::vector<double> sums(grid.cell_count(), 0.0);
  std::vector<std::size_t> counts(grid.cell_count(), 0);

  for (int y = 0; y < analyzer.mask().height(); ++y) {
    for (int x = 0; x < analyzer.mask().width(); ++x) {
      if (!analyzer.mask()(x, y)) continue;
      ++cov.edge_pixels;
      const auto cell = grid.cell_of(x, y);
      if (!cell) continue;
      const edges::EdgePoint p = analyzer.validate(x, y);
      if (!p.valid) continue;

      BlurEstimate e;
      e.point = p;
      edges::MgdSample s1, s2;
      try {
        s1 = edges::measure_mgd_at(original, p, mode, floor);
        s2 = edges::measure_mgd_at(defocused, p, mode, floor);
      } catch (const edges::MeasureError&) {
        ++cov.measure_failures;
        continue;
      }
      e.m1 = s1.value;
      e.m2 = s2.value;
      const auto inv1 = blur::invert_measure(interval, e.m1, cfg.inversion_tol, cfg.range_slack);
      const auto inv2 = blur::invert_measure(interval, e.m2, cfg.inversion_tol, cfg.range_slack);
      e.sigma1_hat = inv1.sigma * s1.axis_scale;
      e.sigma2_hat = inv2.sigma * s2.axis_scale;
      const RelativeBlur rel = relative_blur(e.sigma1_hat, e.sigma2_hat);
      e.sigma_obj = rel.sigma;
      e.negative_discriminant = rel.negative_discriminant;
      const Clamped depth = blur_to_depth(e.sigma_obj, cal);
      e.depth_hat = depth.value;
      e.clamped = inv1.out_of_range || inv2.out_of_range || depth.clamped;

      const std::size_t idx = static_cast<std::size_t>(cell->second) * grid.cols + cell->first;
      sums[idx] += e.depth_hat;
      ++counts[idx];
      ++cov.valid_points;
      cov.clamped += e.clamped ? 1 : 0;
      cov.negative_discriminant += e.negative_discriminant ? 1 : 0;
      out.points.push_back(e);
    }
  }

  std::vector<double> cells(grid.cell_count(), cal.d_max);
  out.covered.assign(grid.cell_count(), false);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (counts[i] == 0) continue;
    cells[i] = sums[i] / static_cast<double>(counts[i]);
    out.covered[i] = true;
    ++cov.covered_cells;
  }
  out.depth = DepthMap(grid.rows, grid.cols, std::move(cells));
  return out;
}

}  // namespace dfd::pipeline

#endif  // DFD_PIPELINE_HPP
