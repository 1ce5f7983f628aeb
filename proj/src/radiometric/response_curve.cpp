#include <algorithm>
#include <cmath>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/parallel.hpp"
#include "hdrfusion/radiometric.hpp"

namespace hdrfusion {

ResponseCurve::ResponseCurve(const std::array<LevelTable, 3>& inverse,
                             const std::array<LevelTable, 3>& derivative)
    : inverse_(inverse), derivative_(derivative) {
  for (int c = 0; c < 3; ++c) {
    const double rmax = radiance_max(c);
    for (int j = 0; j < kLevels; ++j)
      forward_[c][j] = intensity(c, rmax * static_cast<double>(j) / (kLevels - 1));
  }
}

ResponseCurve ResponseCurve::from_functions(const std::function<double(int)>& inverse,
                                            const std::function<double(int)>& derivative) {
  LevelTable inv{}, der{};
  for (int i = 0; i < kLevels; ++i) {
    inv[i] = inverse(i);
    der[i] = derivative(i);
  }
  return ResponseCurve({inv, inv, inv}, {der, der, der});
}

ResponseCurve ResponseCurve::gamma(double g) {
  const double rmax = std::pow(255.0 / 128.0, g);
  return from_functions(
      [=](int i) { return rmax * std::pow(i / 255.0, g); },
      [=](int i) {
        if (i == 0 || i == 255) return 0.0;
        // f(R) = 255 (R/rmax)^(1/g)  =>  f'(R) = 255/(g rmax) (R/rmax)^(1/g - 1)
        return 255.0 / (g * rmax) * std::pow(i / 255.0, 1.0 - g);
      });
}

ResponseCurve ResponseCurve::linear() {
  return from_functions([](int i) { return i / 128.0; }, [](int) { return 128.0; });
}

namespace {

double srgb_decode(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double srgb_slope(double x) {
  return x <= 0.0031308 ? 12.92 : 1.055 / 2.4 * std::pow(x, 1.0 / 2.4 - 1.0);
}

}  // namespace

ResponseCurve ResponseCurve::srgb_like() {
  // Radiance producing full scale, chosen so level 128 maps to radiance 1.
  const double white = 1.0 / srgb_decode(128.0 / 255.0);
  return from_functions([=](int i) { return white * srgb_decode(i / 255.0); },
                        [=](int i) {
                          if (i == 255) return 0.0;
                          return 255.0 / white * srgb_slope(srgb_decode(i / 255.0));
                        });
}

double ResponseCurve::intensity(int channel, double radiance) const {
  const LevelTable& inv = inverse_[channel];
  if (!(radiance > inv[0])) return 0.0;
  if (radiance >= inv[kLevels - 1]) return 255.0;
  const auto it = std::upper_bound(inv.begin(), inv.end(), radiance);
  const int k = static_cast<int>(it - inv.begin()) - 1;
  const double span = inv[k + 1] - inv[k];
  if (!(span > 0)) return k;
  return k + (radiance - inv[k]) / span;
}

// -- noise ------------------------------------------------------------------

NoiseModel NoiseModel::uniform(double sigma_s, double sigma_c, const ResponseCurve& curve) {
  NoiseModel n;
  n.sigma_s.fill(sigma_s);
  n.sigma_c.fill(sigma_c);
  n.update_normalizer(curve);
  return n;
}

double NoiseModel::intensity_std(const ResponseCurve& curve, int channel, int level) const {
  const double r = std::max(0.0, curve.inverse(channel, level));
  const double var = r * sigma_s[channel] * sigma_s[channel] + sigma_c[channel] * sigma_c[channel];
  return curve.derivative(channel, level) * std::sqrt(var);
}

void NoiseModel::update_normalizer(const ResponseCurve& curve) {
  double mx = 0;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < kLevels; ++i) mx = std::max(mx, intensity_std(curve, c, i));
  m = std::max(mx, kNoiseFloor);
}

// -- PCF --------------------------------------------------------------------

PcfVariant parse_pcf_variant(const std::string& name) {
  if (name == "p0") return PcfVariant::P0;
  if (name == "p1") return PcfVariant::P1;
  if (name == "p2") return PcfVariant::P2;
  if (name == "p3") return PcfVariant::P3;
  throw InvalidInput("unknown PCF variant '" + name + "' (expected p0..p3)");
}

const char* to_string(PcfVariant v) {
  switch (v) {
    case PcfVariant::P0: return "p0";
    case PcfVariant::P1: return "p1";
    case PcfVariant::P2: return "p2";
    case PcfVariant::P3: return "p3";
  }
  return "?";
}

ConfidenceTable build_pcf(const ResponseCurve& curve, const NoiseModel& noise) {
  if (!(noise.m > 0)) throw InvalidInput("noise normalizer m must be positive");
  ConfidenceTable t;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < kLevels; ++i) {
      const double p = noise.intensity_std(curve, c, i) / noise.m;
      t.p[c][i] = std::clamp(p, kPcfFloor, 1.0);
    }
  return t;
}

RadianceFrame to_radiance(const RgbdFrame& frame, const ResponseCurve& curve,
                          const ConfidenceTable& pcf) {
  const ImageU8& rgb = frame.rgb;
  if (rgb.channels() != 3) throw InvalidInput("to_radiance expects a 3-channel image");
  const int w = rgb.width(), h = rgb.height();
  RadianceFrame out;
  out.exposure_ms = frame.exposure_ms;
  out.radiance = ImageF(w, h, 3);
  out.confidence = ImageF(w, h, 1);
  out.channel_confidence = ImageF(w, h, 3);
  out.saturated = Mask(w, h, 1, 0);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double conf = 0;
      bool sat = false;
      for (int c = 0; c < 3; ++c) {
        const int level = rgb(x, y, c);
        out.radiance(x, y, c) = static_cast<float>(curve.inverse(c, level));
        const double p = pcf.p[c][level];
        out.channel_confidence(x, y, c) = static_cast<float>(p);
        conf += p;
        sat = sat || level == 0 || level == 255;
      }
      out.confidence(x, y) = static_cast<float>(conf / 3.0);
      out.saturated(x, y) = sat ? 1 : 0;
    }
  });
  return out;
}

}  // namespace hdrfusion
