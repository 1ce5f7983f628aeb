#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hdrfusion {

/// Dense row-major image with interleaved channels.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<std::size_t>(width) * height * channels, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  bool same_shape(int width, int height) const { return width_ == width && height_ == height; }
  template <typename U>
  bool same_shape(const Image<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& operator()(int x, int y, int c = 0) {
    assert(contains(x, y) && c < channels_);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  const T& operator()(int x, int y, int c = 0) const {
    assert(contains(x, y) && c < channels_);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_ * channels_; }
  const T* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_ * channels_; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using ImageF = Image<float>;
using ImageD = Image<double>;
using ImageU8 = Image<std::uint8_t>;
using ImageU16 = Image<std::uint16_t>;
/// Binary mask; nonzero means set.
using Mask = Image<std::uint8_t>;

/// Bilinear sample of channel `c` at continuous pixel coordinates.
/// Caller guarantees 0 <= x < w-1 and 0 <= y < h-1.
template <typename T>
inline double bilinear(const Image<T>& img, double x, double y, int c = 0) {
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const double fx = x - x0;
  const double fy = y - y0;
  const double v00 = img(x0, y0, c), v10 = img(x0 + 1, y0, c);
  const double v01 = img(x0, y0 + 1, c), v11 = img(x0 + 1, y0 + 1, c);
  return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

/// Bilinear value together with its exact partial derivatives in x and y.
struct BilinearSample {
  double value = 0;
  double dx = 0;
  double dy = 0;
};

template <typename T>
inline BilinearSample bilinear_with_gradient(const Image<T>& img, double x, double y, int c = 0) {
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const double fx = x - x0;
  const double fy = y - y0;
  const double v00 = img(x0, y0, c), v10 = img(x0 + 1, y0, c);
  const double v01 = img(x0, y0 + 1, c), v11 = img(x0 + 1, y0 + 1, c);
  BilinearSample s;
  s.value = (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
  s.dx = (1 - fy) * (v10 - v00) + fy * (v11 - v01);
  s.dy = (1 - fx) * (v01 - v00) + fx * (v11 - v10);
  return s;
}

/// True when the 2x2 footprint of a bilinear lookup at (x, y) is inside the
/// image and fully set in `mask`.
inline bool bilinear_footprint_valid(const Mask& mask, double x, double y) {
  if (!(x >= 0.0 && y >= 0.0 && x < mask.width() - 1 && y < mask.height() - 1)) return false;
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  return mask(x0, y0) && mask(x0 + 1, y0) && mask(x0, y0 + 1) && mask(x0 + 1, y0 + 1);
}

}  // namespace hdrfusion
