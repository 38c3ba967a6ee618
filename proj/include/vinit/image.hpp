#pragma once

#include <vector>

#include "vinit/geometry.hpp"

namespace vinit {

/// Dense single-channel raster, row-major, row 0 at the top.
template <typename T>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<T> values;

  Raster() = default;
  Raster(int w, int h, T fill = T(0))
      : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

  T& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
  const T& at(int x, int y) const {
    return values[static_cast<size_t>(y) * width + x];
  }

  bool contains(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }

  /// Nearest-pixel sample; throws OutOfBounds outside the raster.
  T sample_nearest(const Vec2& pixel) const {
    const int x = static_cast<int>(std::lround(pixel.x()));
    const int y = static_cast<int>(std::lround(pixel.y()));
    if (!contains(x, y)) {
      throw OutOfBounds("pixel outside raster");
    }
    return at(x, y);
  }
};

/// Relative inverse depth, defined up to an affine transform.
using DepthMap = Raster<float>;

/// Grayscale intensity in [0, 1].
using Image = Raster<float>;

}  // namespace vinit
