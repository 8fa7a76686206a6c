#ifndef DFD_BLUR_MATH_HPP
#define DFD_BLUR_MATH_HPP

// Blur measures of a Gaussian-defocused step edge, their inverses over
// monotone ranges, and the error made by inverting the continuous gradient
// ratio with discretely sampled data.
//
// Blur values are standard deviations in pixel widths. The edge model is
//   i(y) = i_min + (i_max - i_min)/2 * (1 + erf(y / (sqrt(2) sigma)))
// sampled at integer offsets y from the edge centre.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfd/errors.hpp"

namespace dfd::blur {

inline constexpr double kDefaultReblur = 1.0;         // sigma1
inline constexpr double kInversionTolerance = 1e-6;   // bisection bracket width
inline constexpr int kMaxBisectionSteps = 200;
inline constexpr double kMonotoneGridStep = 1e-3;
inline constexpr double kMonotoneGridEnd = 10.0;
inline constexpr double kDefaultRangeSlack = 1e-9;

inline double erf(double x) noexcept { return std::erf(x); }

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be finite and > 0");
  }
}

}  // namespace detail

struct StepEdgeModel {
  double i_min = 0.0;
  double i_max = 1.0;
  double sigma = 1.0;

  void validate() const {
    if (!(i_max > i_min)) throw DomainError("step edge requires i_max > i_min");
    detail::require_positive(sigma, "step edge sigma");
  }
};

/// Intensity of the defocused step edge at signed offset y from its centre.
inline double step_edge_profile(double y, const StepEdgeModel& m) {
  m.validate();
  return m.i_min + 0.5 * (m.i_max - m.i_min) * (1.0 + erf(y / (std::numbers::sqrt2 * m.sigma)));
}

/// Continuous gradient ratio between an edge and its re-blurred copy at y = 0.
inline double rg_continuous(double sigma, double sigma1) {
  detail::require_positive(sigma, "sigma");
  detail::require_positive(sigma1, "sigma1");
  return std::sqrt((sigma * sigma + sigma1 * sigma1) / (sigma * sigma));
}

/// Closed-form inverse of rg_continuous.
inline double rg_invert(double ratio, double sigma1) {
  detail::require_positive(sigma1, "sigma1");
  if (!std::isfinite(ratio) && ratio > 0.0) return 0.0;
  if (!(ratio > 1.0)) {
    throw DomainError("gradient ratio must exceed 1 under the Gaussian model");
  }
  return sigma1 / std::sqrt(ratio * ratio - 1.0);
}

/// Exact value of the gradient ratio when both gradients are the one-pixel
/// differences i(1) - i(0) of the sampled edge and of its re-blurred copy.
/// Bounded by 1 / erf(1 / (sqrt(2) sigma1)) as sigma -> 0.
inline double rgd_forward(double sigma, double sigma1) {
  detail::require_positive(sigma, "sigma");
  detail::require_positive(sigma1, "sigma1");
  const double num = erf(1.0 / (std::numbers::sqrt2 * sigma));
  const double den = erf(1.0 / std::sqrt(2.0 * (sigma * sigma + sigma1 * sigma1)));
  return num / den;
}

/// (i(2) - i(-2)) / (i(1) - i(-1)) for the sampled edge. Increasing, range (1, 2).
inline double mgd_forward(double sigma) {
  detail::require_positive(sigma, "sigma");
  const double b = 1.0 / (std::numbers::sqrt2 * sigma);
  return erf(2.0 * b) / erf(b);
}

enum class MeasureVariant { rg_continuous, rg_discrete, mg_discrete };

inline const char* to_string(MeasureVariant v) noexcept {
  switch (v) {
    case MeasureVariant::rg_continuous: return "RG_CONTINUOUS";
    case MeasureVariant::rg_discrete: return "RG_DISCRETE";
    case MeasureVariant::mg_discrete: return "MG_DISCRETE";
  }
  return "?";
}

/// A blur measure together with its parameters. The gradient-ratio variants
/// carry the re-blur sigma1; M_Gd carries none.
class MeasureKind {
 public:
  static MeasureKind rg_continuous(double sigma1 = kDefaultReblur) {
    detail::require_positive(sigma1, "sigma1");
    return MeasureKind(MeasureVariant::rg_continuous, sigma1);
  }
  static MeasureKind rg_discrete(double sigma1 = kDefaultReblur) {
    detail::require_positive(sigma1, "sigma1");
    return MeasureKind(MeasureVariant::rg_discrete, sigma1);
  }
  static MeasureKind mg_discrete() { return MeasureKind(MeasureVariant::mg_discrete, {}); }

  [[nodiscard]] MeasureVariant variant() const noexcept { return variant_; }
  [[nodiscard]] std::optional<double> sigma1() const noexcept { return sigma1_; }

  /// Forward measure value at blur sigma.
  double operator()(double sigma) const {
    switch (variant_) {
      case MeasureVariant::rg_continuous: return blur::rg_continuous(sigma, *sigma1_);
      case MeasureVariant::rg_discrete: return rgd_forward(sigma, *sigma1_);
      case MeasureVariant::mg_discrete: return mgd_forward(sigma);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

 private:
  MeasureKind(MeasureVariant v, std::optional<double> s1) : variant_(v), sigma1_(s1) {}

  MeasureVariant variant_;
  std::optional<double> sigma1_;
};

/// A blur interval on which a measure is strictly monotone. Monotonicity is
/// verified on a grid of the given step at construction.
class MonotoneInterval {
 public:
  MonotoneInterval(MeasureKind kind, double sigma_lo, double sigma_hi,
                   double grid_step = kMonotoneGridStep)
      : kind_(kind), sigma_lo_(sigma_lo), sigma_hi_(sigma_hi) {
    detail::require_positive(sigma_lo, "interval lower bound");
    detail::require_positive(grid_step, "grid step");
    if (!(sigma_hi > sigma_lo) || !std::isfinite(sigma_hi)) {
      throw DomainError("interval requires sigma_lo < sigma_hi");
    }
    value_lo_ = kind_(sigma_lo_);
    value_hi_ = kind_(sigma_hi_);
    if (value_lo_ == value_hi_) {
      throw DomainError(std::string(to_string(kind_.variant())) + " is flat on the interval");
    }
    increasing_ = value_hi_ > value_lo_;

    double prev = value_lo_;
    const auto steps = static_cast<long>(std::ceil((sigma_hi_ - sigma_lo_) / grid_step));
    for (long k = 1; k <= steps; ++k) {
      const double s = std::min(sigma_hi_, sigma_lo_ + static_cast<double>(k) * grid_step);
      const double v = kind_(s);
      if (increasing_ ? !(v > prev) : !(v < prev)) {
        throw DomainError(std::string(to_string(kind_.variant())) +
                          " is not strictly monotone on [" + std::to_string(sigma_lo_) + ", " +
                          std::to_string(sigma_hi_) + "] (breaks near sigma=" +
                          std::to_string(s) + ")");
      }
      prev = v;
    }
  }

  [[nodiscard]] const MeasureKind& kind() const noexcept { return kind_; }
  [[nodiscard]] double sigma_lo() const noexcept { return sigma_lo_; }
  [[nodiscard]] double sigma_hi() const noexcept { return sigma_hi_; }
  [[nodiscard]] double value_lo() const noexcept { return value_lo_; }
  [[nodiscard]] double value_hi() const noexcept { return value_hi_; }
  [[nodiscard]] bool increasing() const noexcept { return increasing_; }

 private:
  MeasureKind kind_;
  double sigma_lo_;
  double sigma_hi_;
  double value_lo_ = 0.0;
  double value_hi_ = 0.0;
  bool increasing_ = true;
};

struct Inversion {
  double sigma = 0.0;
  bool out_of_range = false;  // value fell outside the interval's range by more than the slack
  int iterations = 0;
};

/// Blur whose measure equals `value`, by bisection on the interval. Values
/// outside the attainable range resolve to the nearer endpoint; beyond `slack`
/// they are also flagged.
inline Inversion invert_measure(const MonotoneInterval& interval, double value,
                                double tol = kInversionTolerance,
                                double slack = kDefaultRangeSlack) {
  if (!std::isfinite(value)) throw DomainError("measure value must be finite");
  detail::require_positive(tol, "tolerance");

  const double vmin = std::min(interval.value_lo(), interval.value_hi());
  const double vmax = std::max(interval.value_lo(), interval.value_hi());
  // endpoint reached by a value at or below vmin / at or above vmax
  const double at_min = interval.increasing() ? interval.sigma_lo() : interval.sigma_hi();
  const double at_max = interval.increasing() ? interval.sigma_hi() : interval.sigma_lo();
  if (value <= vmin) return {at_min, value < vmin - slack, 0};
  if (value >= vmax) return {at_max, value > vmax + slack, 0};

  const MeasureKind& f = interval.kind();
  double lo = interval.sigma_lo();
  double hi = interval.sigma_hi();
  int it = 0;
  while (hi - lo > tol && it < kMaxBisectionSteps) {
    const double mid = 0.5 * (lo + hi);
    const bool below = f(mid) < value;
    if (below == interval.increasing()) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++it;
  }
  return {0.5 * (lo + hi), false, it};
}

/// Relative error of recovering sigma by applying the continuous inverse
/// sigma1 / sqrt(R^2 - 1) to the exactly sampled ratio R_Gd(sigma).
/// Returns +infinity when R_Gd <= 1, where that inverse does not apply.
inline double erg_error(double sigma, double sigma1) {
  const double r = rgd_forward(sigma, sigma1);
  if (!(r > 1.0)) return std::numeric_limits<double>::infinity();
  return std::abs((sigma1 / sigma) / std::sqrt(r * r - 1.0) - 1.0);
}

/// Mean over finite entries; infinite entries are only counted.
struct ErrorSummary {
  double mean_finite = 0.0;
  std::size_t finite = 0;
  std::size_t infinite = 0;
};

inline ErrorSummary summarize_errors(std::span<const double> errors) {
  ErrorSummary s;
  double sum = 0.0;
  for (double e : errors) {
    if (std::isinf(e)) {
      ++s.infinite;
    } else {
      sum += e;
      ++s.finite;
    }
  }
  if (s.finite > 0) s.mean_finite = sum / static_cast<double>(s.finite);
  return s;
}

/// Smallest grid blur above which the measure is strictly monotone up to
/// `grid_end`. The grid is {step, 2 step, ...}; its origin is `step`.
/// R_G and M_Gd are monotone on all sigma > 0 and return the origin directly.
inline double monotone_onset(const MeasureKind& kind, double grid_step = kMonotoneGridStep,
                             double grid_end = kMonotoneGridEnd) {
  detail::require_positive(grid_step, "grid step");
  if (kind.variant() != MeasureVariant::rg_discrete) return grid_step;

  const auto n = static_cast<long>(std::floor(grid_end / grid_step + 1e-9));
  if (n < 2) return grid_step;
  auto at = [&](long k) { return kind(static_cast<double>(k) * grid_step); };

  // Walk down from the top while the direction set by the last two nodes holds.
  const bool increasing = at(n) > at(n - 1);
  double upper = at(n);
  long k = n - 1;
  for (; k >= 1; --k) {
    const double v = at(k);
    if (increasing ? !(v < upper) : !(v > upper)) break;
    upper = v;
  }
  return static_cast<double>(k + 1) * grid_step;
}

struct CurveRow {
  double sigma = 0.0;
  double rg = 0.0;
  double rgd = 0.0;
  double mgd = 0.0;
  double erg = 0.0;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

/// Rows (sigma, R_G, R_Gd, M_Gd, E_RG) over a positive ascending grid.
inline std::vector<CurveRow> curve_table(std::span<const double> sigma_grid, double sigma1) {
  detail::require_positive(sigma1, "sigma1");
  std::vector<CurveRow> rows;
  rows.reserve(sigma_grid.size());
  double prev = 0.0;
  for (double s : sigma_grid) {
    if (!(s > prev)) throw DomainError("curve grid must be positive and strictly ascending");
    prev = s;
    rows.push_back({s, rg_continuous(s, sigma1), rgd_forward(s, sigma1), mgd_forward(s),
                    erg_error(s, sigma1)});
  }
  return rows;
}

/// {start, start + step, ...} up to `stop` inclusive (with a half-step guard on rounding).
inline std::vector<double> uniform_grid(double start, double stop, double step) {
  detail::require_positive(step, "grid step");
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  g.reserve(static_cast<std::size_t>(std::max(0L, n + 1)));
  for (long k = 0; k <= n; ++k) g.push_back(start + static_cast<double>(k) * step);
  return g;
}

}  // namespace dfd::blur

#endif  // DFD_BLUR_MATH_HPP
