#include <algorithm>
#include <cmath>
#include <random>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/parallel.hpp"
#include "hdrfusion/synth.hpp"

namespace hdrfusion {

RgbdFrame simulate_ldr(const HdrSourceFrame& src, double exposure_ms, const ResponseCurve& curve,
                       const NoiseModel& noise, std::uint64_t seed, double gain) {
  if (!(exposure_ms > 0)) throw InvalidInput("exposure must be positive");
  if (!(gain > 0)) throw InvalidInput("gain must be positive");
  if (src.hdr.channels() != 3) throw InvalidInput("HDR source must have 3 channels");
  const int w = src.hdr.width(), h = src.hdr.height();
  RgbdFrame out;
  out.rgb = ImageU8(w, h, 3);
  out.depth = src.depth;
  out.exposure_ms = exposure_ms;
  const double k = exposure_ms * gain;
  const bool noisy = noise.sigma_s[0] > 0 || noise.sigma_s[1] > 0 || noise.sigma_s[2] > 0 ||
                     noise.sigma_c[0] > 0 || noise.sigma_c[1] > 0 || noise.sigma_c[2] > 0;

  // One generator per row so rows can run in parallel with a fixed stream.
  parallel_for(0, h, [&](int y) {
    std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(y)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const double r = src.hdr(x, y, c) * k;
        double rn = r;
        if (noisy) {
          const double ns = std::sqrt(std::max(0.0, r)) * noise.sigma_s[c] * normal(rng);
          const double nc = noise.sigma_c[c] * normal(rng);
          rn = r + ns + nc;
        }
        const double level = std::round(curve.intensity(c, rn));
        out.rgb(x, y, c) = static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
      }
  });
  return out;
}

ImageF depth_noise(const ImageF& depth, std::uint64_t seed, double a, double b) {
  if (a < 0 || b < 0) throw InvalidInput("depth noise coefficients must be non-negative");
  ImageF out = depth;
  if (a == 0 && b == 0) return out;
  const int w = depth.width(), h = depth.height();
  parallel_for(0, h, [&](int y) {
    std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(y)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int x = 0; x < w; ++x) {
      const double d = depth(x, y);
      const double n = normal(rng);
      if (!(d > 0)) continue;
      out(x, y) = static_cast<float>(std::max(1e-3, d + (a + b * d * d) * n));
    }
  });
  return out;
}

}  // namespace hdrfusion
