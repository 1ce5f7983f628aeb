#include <algorithm>
#include <cmath>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/eval.hpp"

namespace hdrfusion {

namespace {
double luminance(const ImageF& hdr, int x, int y) {
  return 0.2126 * hdr(x, y, 0) + 0.7152 * hdr(x, y, 1) + 0.0722 * hdr(x, y, 2);
}
}  // namespace

ImageU8 tone_map(const ImageF& hdr, double saturation, double key) {
  if (hdr.channels() != 3) throw InvalidInput("tone_map expects a 3-channel image");
  if (!(key > 0)) throw InvalidInput("tone_map key must be positive");
  const int w = hdr.width(), h = hdr.height();
  double log_sum = 0, lmax = 0;
  std::size_t n = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double l = luminance(hdr, x, y);
      if (!(l > 0)) continue;
      log_sum += std::log(l);
      lmax = std::max(lmax, l);
      ++n;
    }
  if (n == 0) throw InvalidInput("tone_map input is all zero");
  const double log_avg = std::exp(log_sum / static_cast<double>(n));
  const double a = key / log_avg;
  const double top = a * lmax / (1 + a * lmax);

  ImageU8 out(w, h, 3, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double l = luminance(hdr, x, y);
      if (!(l > 0)) continue;
      const double ls = a * l;
      const double ld = ls / (1 + ls) / top;
      for (int c = 0; c < 3; ++c) {
        const double ratio = std::max(0.0, static_cast<double>(hdr(x, y, c))) / l;
        const double v = std::pow(std::clamp(std::pow(ratio, saturation) * ld, 0.0, 1.0), 1.0 / 2.2);
        out(x, y, c) = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  return out;
}

}  // namespace hdrfusion
