#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <span>
#include <string>

#include "hdrfusion/image.hpp"
#include "hdrfusion/imagecore.hpp"

namespace hdrfusion {

inline constexpr int kLevels = 256;
/// Lower clamp of every PCF entry.
inline constexpr double kPcfFloor = 1e-3;
/// Lower clamp of the PCF normalization scalar m.
inline constexpr double kNoiseFloor = 1e-6;

using LevelTable = std::array<double, kLevels>;

/// Per-channel camera response f, its inverse and its derivative, tabulated
/// over the 256 intensity levels. Radiance units are fixed by f_inv(128) = 1
/// for recovered curves.
class ResponseCurve {
 public:
  ResponseCurve() = default;
  /// `inverse[c][I]` is the radiance producing level I; `derivative[c][I]` is
  /// f'(r) at r = f_inv(I), in levels per radiance unit.
  ResponseCurve(const std::array<LevelTable, 3>& inverse, const std::array<LevelTable, 3>& derivative);

  /// Tabulates analytic functions, identical for all channels.
  static ResponseCurve from_functions(const std::function<double(int)>& inverse,
                                      const std::function<double(int)>& derivative);

  /// I = 255 (R / R_max)^(1/gamma) with R_max chosen so f_inv(128) = 1.
  /// Derivative is zero at the clipped levels 0 and 255.
  static ResponseCurve gamma(double gamma);
  /// f_inv(I) = I / 128 with constant derivative 128 at every level.
  static ResponseCurve linear();
  /// Piecewise sRGB-style transfer (linear toe, 1/2.4 power shoulder),
  /// normalized so f_inv(128) = 1; derivative zero at level 255.
  static ResponseCurve srgb_like();

  double inverse(int channel, int level) const { return inverse_[channel][level]; }
  double derivative(int channel, int level) const { return derivative_[channel][level]; }
  const LevelTable& inverse_table(int channel) const { return inverse_[channel]; }
  const LevelTable& derivative_table(int channel) const { return derivative_[channel]; }

  /// Continuous f: piecewise-linear inversion of f_inv, clamped to [0, 255].
  double intensity(int channel, double radiance) const;

  /// f sampled at 256 radiance values spread evenly over [0, radiance_max()].
  const LevelTable& forward_table(int channel) const { return forward_[channel]; }
  double radiance_max(int channel) const { return inverse_[channel][kLevels - 1]; }

 private:
  std::array<LevelTable, 3> inverse_{};
  std::array<LevelTable, 3> derivative_{};
  std::array<LevelTable, 3> forward_{};
};

/// Sensor noise: Var = R sigma_s^2 + sigma_c^2 (radiance units), and the PCF
/// normalization m = the largest intensity-domain noise std over channels.
struct NoiseModel {
  std::array<double, 3> sigma_s{};
  std::array<double, 3> sigma_c{};
  double m = kNoiseFloor;

  static NoiseModel none() { return {}; }
  /// Same coefficients on every channel; m tabulated from `curve`.
  static NoiseModel uniform(double sigma_s, double sigma_c, const ResponseCurve& curve);

  /// Noise std of level `level` in intensity units: f'(R) sqrt(R s_s^2 + s_c^2).
  double intensity_std(const ResponseCurve& curve, int channel, int level) const;
  /// Sets m to the max of intensity_std over channels and levels, floored.
  void update_normalizer(const ResponseCurve& curve);
};

enum class PcfVariant { P0, P1, P2, P3 };

PcfVariant parse_pcf_variant(const std::string& name);
const char* to_string(PcfVariant v);

/// Apply a variant to a base confidence p: 1, sqrt(p), p, p^2.
inline double apply_variant(PcfVariant v, double p) {
  switch (v) {
    case PcfVariant::P0: return 1.0;
    case PcfVariant::P1: return std::sqrt(p);
    case PcfVariant::P2: return p;
    case PcfVariant::P3: return p * p;
  }
  return p;
}

/// Per-channel pixel confidence p(I), clamped to [kPcfFloor, 1].
struct ConfidenceTable {
  std::array<LevelTable, 3> p{};

  double value(int channel, int level, PcfVariant variant = PcfVariant::P2) const {
    return apply_variant(variant, p[channel][level]);
  }
};

/// One LDR image of a static scene at a known exposure.
struct LdrExposure {
  ImageU8 rgb;
  double exposure_ms = 0;
};

/// Number of pixel sites sampled for response recovery.
inline constexpr int kCrfSampleSites = 300;

/// Recovers the log-inverse response g = ln f_inv per channel from a static
/// multi-exposure stack with hat-weighted least squares and a second-difference
/// smoothness prior, then projects onto increasing curves and normalizes
/// f_inv(128) = 1. Throws CalibrationError.
ResponseCurve estimate_crf(std::span<const LdrExposure> stack, double smoothness_lambda);

/// Fits sigma_s, sigma_c per channel from >= 10 frames of a static scene at
/// one exposure. Throws CalibrationError.
NoiseModel estimate_noise(std::span<const ImageU8> static_stack, const ResponseCurve& curve);

/// p(I) = f'(R) sqrt(R sigma_s^2 + sigma_c^2) / m with R = f_inv(I).
ConfidenceTable build_pcf(const ResponseCurve& curve, const NoiseModel& noise);

/// Converts an 8-bit frame to radiance with per-pixel confidence.
RadianceFrame to_radiance(const RgbdFrame& frame, const ResponseCurve& curve,
                          const ConfidenceTable& pcf);

/// Curve, noise model and PCF table as stored in a calibration file.
struct Calibration {
  ResponseCurve curve;
  NoiseModel noise;
  ConfidenceTable pcf;

  static Calibration from(const ResponseCurve& curve, const NoiseModel& noise) {
    return {curve, noise, build_pcf(curve, noise)};
  }
};

void save_calibration(const std::filesystem::path& path, const Calibration& calib);
Calibration load_calibration(const std::filesystem::path& path);

}  // namespace hdrfusion
