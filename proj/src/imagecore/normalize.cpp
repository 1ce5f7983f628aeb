#include "hdrfusion/errors.hpp"
#include "hdrfusion/imagecore.hpp"
#include "hdrfusion/parallel.hpp"

namespace hdrfusion {

NormalizedRadianceFrame normalize_radiance(const RadianceFrame& frame, int radius,
                                           const ImageF* depth) {
  const ImageF& rad = frame.radiance;
  const int w = rad.width(), h = rad.height(), ch = rad.channels();
  if (!frame.saturated.same_shape(rad)) throw InvalidInput("saturation mask shape mismatch");
  if (depth && !depth->same_shape(rad)) throw InvalidInput("depth shape mismatch");

  NormalizedRadianceFrame out;
  out.patch_radius = radius;
  out.nr = ImageF(w, h, ch, 0.0f);
  out.mu = ImageF(w, h, ch, 0.0f);
  out.sigma = ImageF(w, h, ch, 0.0f);
  out.valid = Mask(w, h, 1, 1);

  const Image<int> saturated_in_window = window_count(frame.saturated, radius);
  for (int c = 0; c < ch; ++c) {
    const LocalStats stats = local_stats(rad, radius, c);
    parallel_for(0, h, [&](int y) {
      for (int x = 0; x < w; ++x) {
        const float mu = stats.mean(x, y);
        const float sigma = stats.stddev(x, y);
        out.mu(x, y, c) = mu;
        out.sigma(x, y, c) = sigma;
        if (sigma < kSigmaFloor) {
          out.valid(x, y) = 0;
          continue;
        }
        out.nr(x, y, c) = (rad(x, y, c) - mu) / sigma;
      }
    });
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool ok = out.valid(x, y) && saturated_in_window(x, y) == 0;
      if (depth && !((*depth)(x, y) > 0)) ok = false;
      out.valid(x, y) = ok ? 1 : 0;
      if (!ok)
        for (int c = 0; c < ch; ++c) out.nr(x, y, c) = 0.0f;
    }
  return out;
}

ImageF mean_normalized(const NormalizedRadianceFrame& frame) {
  ImageF out = channel_mean(frame.nr);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (!frame.valid(x, y)) out(x, y) = 0.0f;
  return out;
}

}  // namespace hdrfusion
