#ifndef DFD_IMAGE_OPS_HPP
#define DFD_IMAGE_OPS_HPP

// Gaussian kernels, uniform and space-variant separable blur, bilinear
// sampling and image gradients. Borders replicate the edge pixel.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dfd/blur_math.hpp"
#include "dfd/errors.hpp"
#include "dfd/raster.hpp"

namespace dfd::imaging {

inline constexpr double kIdentitySigma = 1e-6;
inline constexpr double kKernelRadiusFactor = 4.0;

/// Discrete Gaussian with taps integrated over each pixel cell,
///   w_k ~ Phi((k + 1/2) / sigma) - Phi((k - 1/2) / sigma),
/// renormalized after truncation at radius ceil(4 sigma) (minimum 1).
/// Blurring a pixel-aligned step with these taps reproduces the continuous
/// erf edge profile up to truncation.
class GaussianKernel {
 public:
  explicit GaussianKernel(double sigma) : sigma_(sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      throw DomainError("kernel sigma must be finite and >= 0");
    }
    if (sigma < kIdentitySigma) {
      radius_ = 0;
      weights_ = {1.0};
      return;
    }
    radius_ = std::max(1, static_cast<int>(std::ceil(kKernelRadiusFactor * sigma)));
    weights_.resize(static_cast<std::size_t>(2 * radius_ + 1));
    const double scale = 1.0 / (std::numbers::sqrt2 * sigma);
    double sum = 0.0;
    for (int k = 0; k <= radius_; ++k) {
      // erf difference is symmetric; compute one side and mirror
      const double w = 0.5 * (blur::erf((k + 0.5) * scale) - blur::erf((k - 0.5) * scale));
      weights_[static_cast<std::size_t>(radius_ + k)] = w;
      weights_[static_cast<std::size_t>(radius_ - k)] = w;
      sum += (k == 0) ? w : 2.0 * w;
    }
    for (double& w : weights_) w /= sum;
  }

  [[nodiscard]] double sigma() const noexcept { return sigma_; }
  [[nodiscard]] int radius() const noexcept { return radius_; }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
  /// Tap at signed offset in [-radius, radius].
  double operator[](int offset) const noexcept {
    return weights_[static_cast<std::size_t>(offset + radius_)];
  }

 private:
  double sigma_;
  int radius_ = 0;
  std::vector<double> weights_;
};

inline GaussianKernel gaussian_kernel(double sigma) { return GaussianKernel(sigma); }

namespace detail {

inline double convolve_row(const Raster<double>& src, int x, int y, const GaussianKernel& k) {
  double acc = 0.0;
  for (int t = -k.radius(); t <= k.radius(); ++t) acc += k[t] * src.clamped(x + t, y);
  return acc;
}

inline double convolve_col(const Raster<double>& src, int x, int y, const GaussianKernel& k) {
  double acc = 0.0;
  for (int t = -k.radius(); t <= k.radius(); ++t) acc += k[t] * src.clamped(x, y + t);
  return acc;
}

}  // namespace detail

/// Separable blur, horizontal pass then vertical pass.
inline Raster<double> convolve_uniform(const Raster<double>& src, double sigma) {
  const GaussianKernel k(sigma);
  if (k.radius() == 0 || src.empty()) return src;
  Raster<double> tmp(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) tmp(x, y) = detail::convolve_row(src, x, y, k);
  Raster<double> out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) out(x, y) = detail::convolve_col(tmp, x, y, k);
  return out;
}

inline GrayImage convolve_uniform(const GrayImage& img, double sigma) {
  return GrayImage(convolve_uniform(img.pixels(), sigma));
}

/// Per-pixel blur sigma(x, y) in pixel widths, bounded by `sigma_max`.
class SigmaField {
 public:
  SigmaField(Raster<double> sigmas, double sigma_max) : sigmas_(std::move(sigmas)) {
    for (double s : sigmas_.values()) {
      if (!(s >= 0.0) || !(s <= sigma_max)) {
        throw DomainError("sigma field value outside [0, " + std::to_string(sigma_max) + "]");
      }
    }
  }

  static SigmaField uniform(int width, int height, double sigma) {
    return SigmaField(Raster<double>(width, height, sigma), sigma);
  }

  [[nodiscard]] int width() const noexcept { return sigmas_.width(); }
  [[nodiscard]] int height() const noexcept { return sigmas_.height(); }
  double operator()(int x, int y) const noexcept { return sigmas_(x, y); }
  [[nodiscard]] const Raster<double>& values() const noexcept { return sigmas_; }

 private:
  Raster<double> sigmas_;
};

/// Space-variant blur in gather form: every output pixel is the normalized
/// Gaussian-weighted sum of input pixels, with the kernel chosen by the sigma at
/// the OUTPUT pixel. Applied separably (horizontal, then vertical), so a uniform
/// field reproduces convolve_uniform exactly.
inline Raster<double> convolve_space_variant(const Raster<double>& src, const SigmaField& field) {
  if (field.width() != src.width() || field.height() != src.height()) {
    throw ValidationError("sigma field " + std::to_string(field.width()) + "x" +
                          std::to_string(field.height()) + " does not match image " +
                          std::to_string(src.width()) + "x" + std::to_string(src.height()));
  }
  std::map<double, GaussianKernel> cache;
  auto kernel_for = [&cache](double s) -> const GaussianKernel& {
    auto it = cache.find(s);
    if (it == cache.end()) it = cache.emplace(s, GaussianKernel(s)).first;
    return it->second;
  };

  Raster<double> tmp(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      tmp(x, y) = detail::convolve_row(src, x, y, kernel_for(field(x, y)));
  Raster<double> out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      out(x, y) = detail::convolve_col(tmp, x, y, kernel_for(field(x, y)));
  return out;
}

inline GrayImage convolve_space_variant(const GrayImage& img, const SigmaField& field) {
  return GrayImage(convolve_space_variant(img.pixels(), field));
}

/// Bilinear interpolation; (x, y) must lie within the pixel-centre hull
/// [0, width-1] x [0, height-1].
inline double sample_bilinear(const Raster<double>& img, double x, double y) {
  if (!(x >= 0.0) || !(y >= 0.0) || x > img.width() - 1 || y > img.height() - 1) {
    throw DomainError("bilinear sample (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") outside image");
  }
  const int x0 = std::min(static_cast<int>(x), img.width() - 1);
  const int y0 = std::min(static_cast<int>(y), img.height() - 1);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = img(x0, y0) * (1.0 - fx) + img(x1, y0) * fx;
  const double bottom = img(x0, y1) * (1.0 - fx) + img(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

inline double sample_bilinear(const GrayImage& img, double x, double y) {
  return sample_bilinear(img.pixels(), x, y);
}

struct Gradient {
  Raster<double> gx;
  Raster<double> gy;
  Raster<double> magnitude;
  Raster<double> orientation;  // atan2(gy, gx), direction of steepest ascent
};

enum class GradientOperator { sobel, central_difference };

/// Gradient per unit pixel. Sobel taps are scaled by 1/8 so that a unit ramp
/// gives magnitude 1; border pixels replicate.
inline Gradient gradient(const Raster<double>& img, GradientOperator op = GradientOperator::sobel) {
  if (img.width() < 3 || img.height() < 3) {
    throw ValidationError("gradient needs an image of at least 3x3");
  }
  const int w = img.width();
  const int h = img.height();
  Gradient g{Raster<double>(w, h), Raster<double>(w, h), Raster<double>(w, h),
             Raster<double>(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dx = 0.0;
      double dy = 0.0;
      if (op == GradientOperator::sobel) {
        const double a = img.clamped(x - 1, y - 1), b = img.clamped(x, y - 1),
                     c = img.clamped(x + 1, y - 1);
        const double d = img.clamped(x - 1, y), f = img.clamped(x + 1, y);
        const double p = img.clamped(x - 1, y + 1), q = img.clamped(x, y + 1),
                     r = img.clamped(x + 1, y + 1);
        dx = ((c + 2.0 * f + r) - (a + 2.0 * d + p)) / 8.0;
        dy = ((p + 2.0 * q + r) - (a + 2.0 * b + c)) / 8.0;
      } else {
        dx = 0.5 * (img.clamped(x + 1, y) - img.clamped(x - 1, y));
        dy = 0.5 * (img.clamped(x, y + 1) - img.clamped(x, y - 1));
      }
      g.gx(x, y) = dx;
      g.gy(x, y) = dy;
      g.magnitude(x, y) = std::hypot(dx, dy);
      g.orientation(x, y) = std::atan2(dy, dx);
    }
  }
  return g;
}

inline Gradient gradient(const GrayImage& img, GradientOperator op = GradientOperator::sobel) {
  return gradient(img.pixels(), op);
}

}  // namespace dfd::imaging

#endif  // DFD_IMAGE_OPS_HPP
