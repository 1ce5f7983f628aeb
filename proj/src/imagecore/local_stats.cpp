#include <algorithm>
#include <cmath>
#include <vector>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/imagecore.hpp"
#include "hdrfusion/parallel.hpp"

namespace hdrfusion {
namespace {

// (w+1) x (h+1) summed-area table with a zero first row and column.
class SummedArea {
 public:
  SummedArea(int w, int h) : w_(w), h_(h), t_(static_cast<std::size_t>(w + 1) * (h + 1), 0.0) {}

  double& at(int x, int y) { return t_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double at(int x, int y) const { return t_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

  // Row prefix sums first (rows independent), then column accumulation
  // (columns independent).
  void integrate() {
    parallel_for(1, h_ + 1, [&](int y) {
      for (int x = 1; x <= w_; ++x) at(x, y) += at(x - 1, y);
    });
    parallel_for(1, w_ + 1, [&](int x) {
      for (int y = 1; y <= h_; ++y) at(x, y) += at(x, y - 1);
    });
  }

  // Sum over [x0, x1] x [y0, y1], inclusive.
  double box(int x0, int y0, int x1, int y1) const {
    return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
  }

 private:
  int w_, h_;
  std::vector<double> t_;
};

}  // namespace

LocalStats local_stats(const ImageF& map, int radius, int channel) {
  if (radius < 1) throw InvalidInput("local_stats radius must be >= 1");
  const int w = map.width(), h = map.height();
  // Shifting by the global mean keeps the variance well conditioned when
  // the patch std is tiny compared with the signal level.
  double offset = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) offset += map(x, y, channel);
  offset /= std::max<std::size_t>(1, map.pixel_count());

  SummedArea s1(w, h), s2(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = map(x, y, channel) - offset;
      s1.at(x + 1, y + 1) = v;
      s2.at(x + 1, y + 1) = v * v;
    }
  s1.integrate();
  s2.integrate();

  LocalStats out{ImageF(w, h, 1), ImageF(w, h, 1)};
  parallel_for(0, h, [&](int y) {
    const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      const double n = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
      const double m = s1.box(x0, y0, x1, y1) / n;
      const double var = std::max(0.0, s2.box(x0, y0, x1, y1) / n - m * m);
      out.mean(x, y) = static_cast<float>(m + offset);
      out.stddev(x, y) = static_cast<float>(std::sqrt(var));
    }
  });
  return out;
}

Image<int> window_count(const Mask& mask, int radius) {
  const int w = mask.width(), h = mask.height();
  SummedArea s(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) s.at(x + 1, y + 1) = mask(x, y) ? 1.0 : 0.0;
  s.integrate();
  Image<int> out(w, h, 1, 0);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      out(x, y) = static_cast<int>(std::lround(s.box(x0, y0, x1, y1)));
    }
  }
  return out;
}

}  // namespace hdrfusion
