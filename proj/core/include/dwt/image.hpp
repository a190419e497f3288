#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dwt/error.hpp"

namespace dwt {

/// Pixel grid extent plus isotropic physical spacing (mm per pixel).
struct GridGeometry {
  int width = 0;
  int height = 0;
  double spacing = 1.0;

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }

  void validate() const {
    if (width < 1 || height < 1) {
      throw Error(ErrorKind::Domain, "grid dimensions must be >= 1");
    }
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
      throw Error(ErrorKind::Domain, "pixel spacing must be positive and finite");
    }
  }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Row-major dense image. Value type, cheap to move.
template <typename T>
class Image {
 public:
  Image() = default;
  explicit Image(GridGeometry geometry, T fill = T{})
      : geometry_(geometry), data_(geometry.pixel_count(), fill) {}

  const GridGeometry& geometry() const { return geometry_; }
  int width() const { return geometry_.width; }
  int height() const { return geometry_.height; }
  double spacing() const { return geometry_.spacing; }
  void set_spacing(double spacing) { geometry_.spacing = spacing; }
  bool contains(int x, int y) const { return geometry_.contains(x, y); }
  std::size_t size() const { return data_.size(); }

  T& operator()(int x, int y) { return data_[geometry_.index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[geometry_.index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  GridGeometry geometry_;
  std::vector<T> data_;
};

/// Rotates 90 degrees counterclockwise as displayed (y axis pointing down):
/// source (x, y) lands at (y, width - 1 - x).
template <typename T>
Image<T> rotate90(const Image<T>& src) {
  GridGeometry g{src.height(), src.width(), src.spacing()};
  Image<T> out(g);
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      out(y, src.width() - 1 - x) = src(x, y);
    }
  }
  return out;
}

}  // namespace dwt
