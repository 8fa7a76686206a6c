#ifndef DFD_EDGES_HPP
#define DFD_EDGES_HPP

// Edge location (Canny), edge-normal orientation, validation of a measurement
// circle, and the M_Gd ratio sampled at a validated edge point.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dfd/errors.hpp"
#include "dfd/image_ops.hpp"
#include "dfd/raster.hpp"

namespace dfd::edges {

inline constexpr double kDegree = std::numbers::pi / 180.0;

struct CannyParams {
  double smoothing_sigma = 1.0;
  double low_ratio = 0.1;   // of the maximum gradient magnitude
  double high_ratio = 0.2;

  void validate() const {
    if (!(smoothing_sigma >= 0.0)) throw ValidationError("canny smoothing sigma must be >= 0");
    if (!(low_ratio > 0.0 && low_ratio < high_ratio && high_ratio < 1.0)) {
      throw ValidationError("canny ratios must satisfy 0 < low < high < 1");
    }
  }
};

namespace detail {

/// Non-maximum suppression along the gradient (4 quantized directions) followed
/// by double-threshold hysteresis over 8-connected neighbours.
inline EdgeMask canny_from_gradient(const imaging::Gradient& g, const CannyParams& p) {
  const int w = g.magnitude.width();
  const int h = g.magnitude.height();
  EdgeMask mask(w, h, 0);

  double max_mag = 0.0;
  for (double m : g.magnitude.values()) max_mag = std::max(max_mag, m);
  if (!(max_mag > 0.0)) return mask;
  const double high = p.high_ratio * max_mag;
  const double low = p.low_ratio * max_mag;

  // 0: none, 1: weak, 2: strong
  Raster<std::uint8_t> cls(w, h, 0);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double m = g.magnitude(x, y);
      if (m < low) continue;
      double deg = g.orientation(x, y) / kDegree;  // (-180, 180]
      if (deg < 0.0) deg += 180.0;                 // [0, 180)
      int dx = 1, dy = 0;
      if (deg >= 22.5 && deg < 67.5) {
        dx = 1; dy = 1;
      } else if (deg >= 67.5 && deg < 112.5) {
        dx = 0; dy = 1;
      } else if (deg >= 112.5 && deg < 157.5) {
        dx = -1; dy = 1;
      }
      // Strict on one side, non-strict on the other: of two equal neighbours
      // across the gradient exactly one survives.
      const double behind = g.magnitude(x - dx, y - dy);
      const double ahead = g.magnitude(x + dx, y + dy);
      if (m > behind && m >= ahead) cls(x, y) = m >= high ? 2 : 1;
    }
  }

  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (cls(x, y) == 2) {
        mask(x, y) = 1;
        stack.emplace_back(x, y);
      }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int ny = y - 1; ny <= y + 1; ++ny)
      for (int nx = x - 1; nx <= x + 1; ++nx) {
        if (!cls.contains(nx, ny) || mask(nx, ny) || cls(nx, ny) != 1) continue;
        mask(nx, ny) = 1;
        stack.emplace_back(nx, ny);
      }
  }
  return mask;
}

}  // namespace detail

/// Canny edge mask: Gaussian smoothing, Sobel gradient, non-maximum suppression,
/// hysteresis with thresholds relative to the maximum gradient magnitude.
inline EdgeMask canny(const GrayImage& img, const CannyParams& params = {}) {
  params.validate();
  if (img.width() < 7 || img.height() < 7) {
    throw ValidationError("canny needs an image of at least 7x7");
  }
  const auto smoothed = imaging::convolve_uniform(img.pixels(), params.smoothing_sigma);
  return detail::canny_from_gradient(imaging::gradient(smoothed), params);
}

enum class RejectReason { no_edge, multi_orientation, low_contrast, out_of_bounds, off_center };

inline const char* to_string(RejectReason r) noexcept {
  switch (r) {
    case RejectReason::no_edge: return "NO_EDGE";
    case RejectReason::multi_orientation: return "MULTI_ORIENTATION";
    case RejectReason::low_contrast: return "LOW_CONTRAST";
    case RejectReason::out_of_bounds: return "OUT_OF_BOUNDS";
    case RejectReason::off_center: return "OFF_CENTER";
  }
  return "?";
}

struct EdgePoint {
  int x = 0;
  int y = 0;
  double normal_angle = 0.0;  // radians in [-pi, pi); intensity increases along it
  bool valid = false;
  std::optional<RejectReason> reject_reason;

  static EdgePoint accepted(int x, int y, double angle) { return {x, y, angle, true, {}}; }
  static EdgePoint rejected(int x, int y, RejectReason r, double angle = 0.0) {
    return {x, y, angle, false, r};
  }
};

/// How the profile across an edge is sampled.
///  - nearest_axis: integer pixel steps along the raster axis closest to the
///    normal; blur recovered along that axis is scaled by |cos| of the axis tilt.
///  - true_normal: bilinear samples along the normal itself.
enum class SamplingMode { nearest_axis, true_normal };

/// Maps an angle to [-pi, pi).
inline double wrap_angle(double a) noexcept {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

/// Edge normal at (x, y): the 1-degree candidate angle maximizing the summed
/// squared directional derivative over the circle, with each pixel's directional
/// derivative formed from its Sobel gradient. Signed so intensity increases
/// along the result. nullopt when the circle carries no variation.
inline std::optional<double> edge_orientation(const imaging::Gradient& grad, int x, int y,
                                              int radius) {
  const auto& gx = grad.gx;
  if (x - radius < 0 || y - radius < 0 || x + radius >= gx.width() ||
      y + radius >= gx.height()) {
    throw DomainError("measurement circle does not fit in the image");
  }
  double jxx = 0.0, jyy = 0.0, jxy = 0.0, sx = 0.0, sy = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > radius * radius) continue;
      const double a = grad.gx(x + dx, y + dy);
      const double b = grad.gy(x + dx, y + dy);
      jxx += a * a;
      jyy += b * b;
      jxy += a * b;
      sx += a;
      sy += b;
    }
  if (jxx + jyy < 1e-14) return std::nullopt;

  int best = 0;
  double best_energy = -1.0;
  for (int deg = 0; deg < 180; ++deg) {
    const double c = std::cos(deg * kDegree);
    const double s = std::sin(deg * kDegree);
    const double energy = jxx * c * c + 2.0 * jxy * c * s + jyy * s * s;
    if (energy > best_energy) {
      best_energy = energy;
      best = deg;
    }
  }
  double angle = best * kDegree;
  if (std::cos(angle) * sx + std::sin(angle) * sy < 0.0) angle += std::numbers::pi;
  return wrap_angle(angle);
}

inline std::optional<double> edge_orientation(const GrayImage& img, int x, int y, int radius) {
  return edge_orientation(imaging::gradient(img), x, y, radius);
}

/// Unit step across the edge for the given sampling mode, plus the factor that
/// converts blur measured along that step into blur along the normal.
struct SamplingAxis {
  double ux = 1.0;
  double uy = 0.0;
  double scale = 1.0;
};

inline SamplingAxis sampling_axis(double normal_angle, SamplingMode mode) {
  if (mode == SamplingMode::true_normal) {
    return {std::cos(normal_angle), std::sin(normal_angle), 1.0};
  }
  const long quadrant = std::lround(normal_angle / (0.5 * std::numbers::pi));
  const double axis_angle = static_cast<double>(quadrant) * 0.5 * std::numbers::pi;
  static constexpr std::array<std::array<int, 2>, 4> dirs{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  const auto& d = dirs[static_cast<std::size_t>(((quadrant % 4) + 4) % 4)];
  return {static_cast<double>(d[0]), static_cast<double>(d[1]),
          std::abs(std::cos(normal_angle - axis_angle))};
}

/// Intensity at `offset` steps along the axis from (x, y), or nullopt outside
/// the image.
inline std::optional<double> profile_sample(const GrayImage& img, int x, int y,
                                            const SamplingAxis& axis, SamplingMode mode,
                                            int offset) {
  if (mode == SamplingMode::nearest_axis) {
    const int px = x + offset * static_cast<int>(axis.ux);
    const int py = y + offset * static_cast<int>(axis.uy);
    if (!img.contains(px, py)) return std::nullopt;
    return img(px, py);
  }
  const double px = x + offset * axis.ux;
  const double py = y + offset * axis.uy;
  if (px < 0.0 || py < 0.0 || px > img.width() - 1 || py > img.height() - 1) return std::nullopt;
  return imaging::sample_bilinear(img, px, py);
}

struct EdgeConfig {
  CannyParams canny;
  int radius = 3;
  double angle_tol = 15.0 * kDegree;  // circular std of edge orientations, mod pi
  double min_contrast = 0.02;         // i(+r) - i(-r) along the normal
  double centering_tol = 0.05;        // first-difference asymmetry at the centre pixel
  double denominator_floor = 1e-4;    // |i(1) - i(-1)|
  int min_support = 3;                // edge pixels inside the circle
  SamplingMode sampling = SamplingMode::nearest_axis;

  void validate() const {
    canny.validate();
    if (radius < 2) throw ValidationError("measurement radius must be >= 2");
    if (!(angle_tol > 0.0)) throw ValidationError("angle tolerance must be > 0");
    if (!(min_contrast >= 0.0)) throw ValidationError("min contrast must be >= 0");
    if (!(centering_tol > 0.0)) throw ValidationError("centering tolerance must be > 0");
    if (!(denominator_floor > 0.0)) throw ValidationError("denominator floor must be > 0");
    if (min_support < 1) throw ValidationError("min support must be >= 1");
  }
};

/// Circular standard deviation of axial angles (defined mod pi), in radians.
inline double axial_circular_std(const std::vector<double>& angles) {
  if (angles.empty()) return 0.0;
  double c = 0.0, s = 0.0;
  for (double a : angles) {
    c += std::cos(2.0 * a);
    s += std::sin(2.0 * a);
  }
  const double r = std::hypot(c, s) / static_cast<double>(angles.size());
  if (r <= 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * std::sqrt(std::max(0.0, -2.0 * std::log(std::min(1.0, r))));
}

/// Holds an image with its Canny mask and gradients so that many points can be
/// validated without recomputation.
class EdgeAnalyzer {
 public:
  EdgeAnalyzer(GrayImage img, EdgeConfig cfg) : img_(std::move(img)), cfg_(cfg) {
    cfg_.validate();
    if (img_.width() < 7 || img_.height() < 7) {
      throw ValidationError("edge analysis needs an image of at least 7x7");
    }
    smoothed_grad_ = imaging::gradient(
        imaging::convolve_uniform(img_.pixels(), cfg_.canny.smoothing_sigma));
    mask_ = detail::canny_from_gradient(smoothed_grad_, cfg_.canny);
    raw_grad_ = imaging::gradient(img_.pixels());
  }

  EdgeAnalyzer(GrayImage img, EdgeMask mask, EdgeConfig cfg)
      : img_(std::move(img)), cfg_(cfg), mask_(std::move(mask)) {
    cfg_.validate();
    if (mask_.width() != img_.width() || mask_.height() != img_.height()) {
      throw ValidationError("edge mask does not match image dimensions");
    }
    smoothed_grad_ = imaging::gradient(
        imaging::convolve_uniform(img_.pixels(), cfg_.canny.smoothing_sigma));
    raw_grad_ = imaging::gradient(img_.pixels());
  }

  [[nodiscard]] const GrayImage& image() const noexcept { return img_; }
  [[nodiscard]] const EdgeMask& mask() const noexcept { return mask_; }
  [[nodiscard]] const EdgeConfig& config() const noexcept { return cfg_; }

  [[nodiscard]] EdgePoint validate(int x, int y) const {
    const int r = cfg_.radius;
    if (x - r < 0 || y - r < 0 || x + r >= img_.width() || y + r >= img_.height()) {
      return EdgePoint::rejected(x, y, RejectReason::out_of_bounds);
    }

    std::vector<double> orientations;
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        if (dx * dx + dy * dy > r * r || !mask_(x + dx, y + dy)) continue;
        orientations.push_back(smoothed_grad_.orientation(x + dx, y + dy));
      }
    if (static_cast<int>(orientations.size()) < cfg_.min_support) {
      return EdgePoint::rejected(x, y, RejectReason::no_edge);
    }
    if (axial_circular_std(orientations) > cfg_.angle_tol) {
      return EdgePoint::rejected(x, y, RejectReason::multi_orientation);
    }

    const auto normal = edge_orientation(raw_grad_, x, y, r);
    if (!normal) return EdgePoint::rejected(x, y, RejectReason::low_contrast);

    const SamplingAxis axis = sampling_axis(*normal, cfg_.sampling);
    auto at = [&](int k) { return profile_sample(img_, x, y, axis, cfg_.sampling, k); };
    const auto far_lo = at(-r), far_hi = at(r), lo2 = at(-2), hi2 = at(2);
    if (!far_lo || !far_hi || !lo2 || !hi2) {
      return EdgePoint::rejected(x, y, RejectReason::out_of_bounds, *normal);
    }
    if (*far_hi - *far_lo < cfg_.min_contrast) {
      return EdgePoint::rejected(x, y, RejectReason::low_contrast, *normal);
    }
    const double m1 = *at(-1), c0 = *at(0), p1 = *at(1);
    const double den = p1 - m1;
    if (std::abs(den) < cfg_.denominator_floor) {
      return EdgePoint::rejected(x, y, RejectReason::low_contrast, *normal);
    }
    const double asymmetry = ((p1 - c0) - (c0 - m1)) / den;
    if (std::abs(asymmetry) > cfg_.centering_tol) {
      return EdgePoint::rejected(x, y, RejectReason::off_center, *normal);
    }
    return EdgePoint::accepted(x, y, *normal);
  }

  /// Every mask pixel, validated, in raster order.
  [[nodiscard]] std::vector<EdgePoint> scan() const {
    std::vector<EdgePoint> out;
    for (int y = 0; y < mask_.height(); ++y)
      for (int x = 0; x < mask_.width(); ++x)
        if (mask_(x, y)) out.push_back(validate(x, y));
    return out;
  }

 private:
  GrayImage img_;
  EdgeConfig cfg_;
  EdgeMask mask_;
  imaging::Gradient smoothed_grad_;
  imaging::Gradient raw_grad_;
};

/// Validates the measurement circle around an edge pixel of `mask`.
inline EdgePoint validate_point(const EdgeMask& mask, const GrayImage& img, int x, int y,
                                int radius, double angle_tol, double min_contrast,
                                EdgeConfig base = {}) {
  base.radius = radius;
  base.angle_tol = angle_tol;
  base.min_contrast = min_contrast;
  return EdgeAnalyzer(img, mask, base).validate(x, y);
}

class MeasureError : public std::runtime_error {
 public:
  MeasureError(RejectReason reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}
  [[nodiscard]] RejectReason reason() const noexcept { return reason_; }

 private:
  RejectReason reason_;
};

/// M_Gd ratio at a point and the factor mapping blur along the sampling axis to
/// blur along the edge normal: sigma = axis_scale * M_Gd^{-1}(value).
struct MgdSample {
  double value = 0.0;
  double axis_scale = 1.0;
};

/// (i(+2) - i(-2)) / (i(+1) - i(-1)) with offsets taken along the point's normal.
inline MgdSample measure_mgd_at(const GrayImage& img, const EdgePoint& point,
                                SamplingMode mode = SamplingMode::nearest_axis,
                                double denominator_floor = 1e-4) {
  if (!point.valid) throw ValidationError("measure_mgd_at requires a valid edge point");
  const SamplingAxis axis = sampling_axis(point.normal_angle, mode);
  const auto m2 = profile_sample(img, point.x, point.y, axis, mode, -2);
  const auto m1 = profile_sample(img, point.x, point.y, axis, mode, -1);
  const auto p1 = profile_sample(img, point.x, point.y, axis, mode, 1);
  const auto p2 = profile_sample(img, point.x, point.y, axis, mode, 2);
  if (!m2 || !m1 || !p1 || !p2) {
    throw MeasureError(RejectReason::out_of_bounds, "profile samples leave the image");
  }
  const double den = *p1 - *m1;
  if (std::abs(den) < denominator_floor) {
    throw MeasureError(RejectReason::low_contrast, "i(1) - i(-1) below the denominator floor");
  }
  return {(*p2 - *m2) / den, axis.scale};
}

}  // namespace dfd::edges

#endif  // DFD_EDGES_HPP
