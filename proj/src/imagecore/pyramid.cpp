#include <algorithm>
#include <cmath>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/imagecore.hpp"
#include "hdrfusion/parallel.hpp"

namespace hdrfusion {

int patch_radius_for_level(int level, int base_radius) {
  return std::max(2, base_radius >> level);
}

void check_pyramid_levels(int width, int height, int levels) {
  if (levels < 1) throw InvalidInput("pyramid needs at least one level");
  const int min_dim = std::min(width, height);
  if (min_dim < 1 || (1 << (levels - 1)) > min_dim)
    throw InvalidInput("pyramid levels exceed log2 of the smaller image dimension");
}

std::vector<ImageF> build_pyramid(const ImageF& image, int levels) {
  check_pyramid_levels(image.width(), image.height(), levels);
  std::vector<ImageF> pyr;
  pyr.reserve(static_cast<std::size_t>(levels));
  pyr.push_back(image);
  for (int l = 1; l < levels; ++l) {
    const ImageF& src = pyr.back();
    ImageF dst(src.width() / 2, src.height() / 2, src.channels());
    const int ch = src.channels();
    parallel_for(0, dst.height(), [&](int y) {
      for (int x = 0; x < dst.width(); ++x)
        for (int c = 0; c < ch; ++c)
          dst(x, y, c) = 0.25f * (src(2 * x, 2 * y, c) + src(2 * x + 1, 2 * y, c) +
                                  src(2 * x, 2 * y + 1, c) + src(2 * x + 1, 2 * y + 1, c));
    });
    pyr.push_back(std::move(dst));
  }
  return pyr;
}

std::vector<ImageF> build_depth_pyramid(const ImageF& depth, int levels) {
  check_pyramid_levels(depth.width(), depth.height(), levels);
  std::vector<ImageF> pyr;
  pyr.reserve(static_cast<std::size_t>(levels));
  pyr.push_back(depth);
  for (int l = 1; l < levels; ++l) {
    const ImageF& src = pyr.back();
    ImageF dst(src.width() / 2, src.height() / 2, 1, 0.0f);
    parallel_for(0, dst.height(), [&](int y) {
      for (int x = 0; x < dst.width(); ++x) {
        const float s[4] = {src(2 * x, 2 * y), src(2 * x + 1, 2 * y), src(2 * x, 2 * y + 1),
                            src(2 * x + 1, 2 * y + 1)};
        const bool all_valid = s[0] > 0 && s[1] > 0 && s[2] > 0 && s[3] > 0;
        if (all_valid) {
          const auto [lo, hi] = std::minmax({s[0], s[1], s[2], s[3]});
          if (hi - lo < 0.1f) {
            dst(x, y) = 0.25f * (s[0] + s[1] + s[2] + s[3]);
            continue;
          }
        }
        for (float v : s)
          if (v > 0) {
            dst(x, y) = v;
            break;
          }
      }
    });
    pyr.push_back(std::move(dst));
  }
  return pyr;
}

std::vector<Mask> build_mask_pyramid_any(const Mask& mask, int levels) {
  check_pyramid_levels(mask.width(), mask.height(), levels);
  std::vector<Mask> pyr;
  pyr.push_back(mask);
  for (int l = 1; l < levels; ++l) {
    const Mask& src = pyr.back();
    Mask dst(src.width() / 2, src.height() / 2, 1, 0);
    for (int y = 0; y < dst.height(); ++y)
      for (int x = 0; x < dst.width(); ++x)
        dst(x, y) = (src(2 * x, 2 * y) || src(2 * x + 1, 2 * y) || src(2 * x, 2 * y + 1) ||
                     src(2 * x + 1, 2 * y + 1))
                        ? 1
                        : 0;
    pyr.push_back(std::move(dst));
  }
  return pyr;
}

ImageF channel_mean(const ImageF& image3) {
  ImageF out(image3.width(), image3.height(), 1);
  const int ch = image3.channels();
  for (int y = 0; y < image3.height(); ++y)
    for (int x = 0; x < image3.width(); ++x) {
      float s = 0;
      for (int c = 0; c < ch; ++c) s += image3(x, y, c);
      out(x, y) = s / static_cast<float>(ch);
    }
  return out;
}

ImageF channel_mean(const ImageU8& image3) {
  ImageF out(image3.width(), image3.height(), 1);
  const int ch = image3.channels();
  for (int y = 0; y < image3.height(); ++y)
    for (int x = 0; x < image3.width(); ++x) {
      float s = 0;
      for (int c = 0; c < ch; ++c) s += image3(x, y, c);
      out(x, y) = s / static_cast<float>(ch);
    }
  return out;
}

}  // namespace hdrfusion
