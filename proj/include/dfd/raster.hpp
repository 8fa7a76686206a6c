#ifndef DFD_RASTER_HPP
#define DFD_RASTER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dfd/errors.hpp"

namespace dfd {

/// Row-major 2-D array. Plain storage; no value invariants.
template <class T>
class Raster {
 public:
  Raster() = default;

  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw ValidationError("raster data length " + std::to_string(data_.size()) +
                            " does not match " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  /// Edge-replicating access.
  [[nodiscard]] const T& clamped(int x, int y) const noexcept {
    return data_[index(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1))];
  }

  [[nodiscard]] std::span<T> values() noexcept { return data_; }
  [[nodiscard]] std::span<const T> values() const noexcept { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  static void check_dims(int width, int height) {
    if (width < 0 || height < 0) {
      throw ValidationError("raster dimensions must be nonnegative");
    }
  }

  [[nodiscard]] std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using EdgeMask = Raster<std::uint8_t>;

/// Normalized luminance image. Every value is finite and lies in [0, 1]; finite
/// values outside the range (rounding residue of normalized filters) are clamped,
/// non-finite values are rejected.
class GrayImage {
 public:
  GrayImage() = default;

  GrayImage(int width, int height, std::vector<double> data)
      : GrayImage(Raster<double>(width, height, std::move(data))) {}

  explicit GrayImage(Raster<double> pixels) : pixels_(std::move(pixels)) {
    for (double& v : pixels_.values()) {
      if (!std::isfinite(v)) {
        throw ValidationError("image contains a non-finite value");
      }
      v = std::clamp(v, 0.0, 1.0);
    }
  }

  static GrayImage filled(int width, int height, double value) {
    return GrayImage(Raster<double>(width, height, value));
  }

  [[nodiscard]] int width() const noexcept { return pixels_.width(); }
  [[nodiscard]] int height() const noexcept { return pixels_.height(); }
  [[nodiscard]] bool contains(int x, int y) const noexcept { return pixels_.contains(x, y); }
  double operator()(int x, int y) const noexcept { return pixels_(x, y); }
  [[nodiscard]] const Raster<double>& pixels() const noexcept { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  Raster<double> pixels_;
};

inline bool same_size(const GrayImage& a, const GrayImage& b) noexcept {
  return a.width() == b.width() && a.height() == b.height();
}

}  // namespace dfd

#endif  // DFD_RASTER_HPP
