#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/radiometric.hpp"
#include "hdrfusion/synth.hpp"

using namespace hdrfusion;
namespace fs = std::filesystem;

namespace {

// Radiance equal to the intensity level, unit slope.
ResponseCurve level_curve() {
  return ResponseCurve::from_functions([](int i) { return static_cast<double>(i); },
                                       [](int i) { return i == 255 ? 0.0 : 1.0; });
}

// Horizontal log ramp of luminance over [lo, hi], equal in all channels.
HdrSourceFrame ramp(int w, int h, double lo, double hi) {
  HdrSourceFrame f;
  f.hdr = ImageF(w, h, 3);
  f.depth = ImageF(w, h, 1, 1.0f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double t = (x + 0.37 * (y % 7) / 7.0) / (w - 1);
      const double l = lo * std::pow(hi / lo, std::min(1.0, t));
      for (int c = 0; c < 3; ++c) f.hdr(x, y, c) = static_cast<float>(l * (1 + 0.05 * c));
    }
  return f;
}

// A little sensor noise dithers the 8-bit quantization, as in real stacks.
NoiseModel dither() {
  NoiseModel n;
  n.sigma_s.fill(0.002);
  n.sigma_c.fill(0.0002);
  return n;
}

std::vector<LdrExposure> exposure_stack(const ResponseCurve& curve, const NoiseModel& noise) {
  const HdrSourceFrame src = ramp(256, 32, 0.002, 3.0);
  std::vector<LdrExposure> stack;
  int k = 0;
  for (double ms = 1; ms <= 128; ms *= 2)
    stack.push_back({simulate_ldr(src, ms, curve, noise, 100 + k++).rgb, ms});
  return stack;
}

std::vector<ImageU8> still_stack(const ResponseCurve& curve, const NoiseModel& noise, int frames, double lo,
                                 double hi, int h) {
  const HdrSourceFrame src = ramp(256, h, lo, hi);
  std::vector<ImageU8> out;
  for (int i = 0; i < frames; ++i) out.push_back(simulate_ldr(src, 1.0, curve, noise, 500 + i).rgb);
  return out;
}

double max_relative_error(const ResponseCurve& est, const std::function<double(int)>& truth, int lo, int hi) {
  double worst = 0;
  for (int c = 0; c < 3; ++c)
    for (int i = lo; i <= hi; ++i)
      worst = std::max(worst, std::abs(est.inverse(c, i) - truth(i)) / truth(i));
  return worst;
}

}  // namespace

class CurveInvariants : public ::testing::TestWithParam<int> {};

TEST_P(CurveInvariants, MonotoneRoundTripNonNegativeSlope) {
  const ResponseCurve curve = GetParam() == 0   ? ResponseCurve::gamma(2.2)
                              : GetParam() == 1 ? ResponseCurve::linear()
                                                : ResponseCurve::srgb_like();
  for (int c = 0; c < 3; ++c) {
    for (int i = 2; i <= 254; ++i) EXPECT_GT(curve.inverse(c, i), curve.inverse(c, i - 1));
    for (int i = 1; i <= 254; ++i) EXPECT_NEAR(curve.intensity(c, curve.inverse(c, i)), i, 1.0);
    for (int i = 0; i < kLevels; ++i) EXPECT_GE(curve.derivative(c, i), 0.0);
    EXPECT_NEAR(curve.inverse(c, 128), 1.0, 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Curves, CurveInvariants, ::testing::Values(0, 1, 2));

TEST(ResponseCurve, GammaClosedForm) {
  const ResponseCurve g = ResponseCurve::gamma(2.2);
  const double rmax = std::pow(255.0 / 128.0, 2.2);
  EXPECT_NEAR(g.inverse(0, 200), rmax * std::pow(200 / 255.0, 2.2), 1e-12);
  EXPECT_NEAR(g.intensity(1, rmax * std::pow(77.5 / 255.0, 2.2)), 77.5, 1e-2);
  EXPECT_EQ(g.derivative(0, 255), 0.0);
  // Slope against a centered difference of the closed-form forward curve.
  const double r = g.inverse(2, 90), h = 1e-6;
  auto f = [&](double x) { return 255.0 * std::pow(x / rmax, 1 / 2.2); };
  EXPECT_NEAR(g.derivative(2, 90), (f(r + h) - f(r - h)) / (2 * h), 1e-4);
}

TEST(ResponseCurve, IntensityClampsOutsideDomain) {
  const ResponseCurve g = ResponseCurve::gamma(2.2);
  EXPECT_EQ(g.intensity(0, -1.0), 0.0);
  EXPECT_EQ(g.intensity(0, 1e9), 255.0);
}

TEST(EstimateCrf, RecoversLinearResponse) {
  const ResponseCurve truth = ResponseCurve::linear();
  const ResponseCurve est = estimate_crf(exposure_stack(truth, dither()), 10.0);
  EXPECT_LT(max_relative_error(est, [](int i) { return i / 128.0; }, 10, 245), 0.02);
}

TEST(EstimateCrf, RecoversGammaResponse) {
  const ResponseCurve truth = ResponseCurve::gamma(2.2);
  const ResponseCurve est = estimate_crf(exposure_stack(truth, dither()), 10.0);
  EXPECT_LT(max_relative_error(est, [&](int i) { return truth.inverse(0, i); }, 10, 245), 0.05);
  EXPECT_NEAR(est.inverse(0, 128), 1.0, 1e-9);
  for (int i = 1; i < kLevels; ++i) EXPECT_GE(est.inverse(1, i), est.inverse(1, i - 1));
}

TEST(EstimateCrf, TooFewExposures) {
  auto stack = exposure_stack(ResponseCurve::linear(), NoiseModel::none());
  stack.resize(2);
  EXPECT_THROW(estimate_crf(stack, 10.0), CalibrationError);
}

TEST(EstimateCrf, AllSaturatedFails) {
  std::vector<LdrExposure> stack;
  for (double ms : {1.0, 2.0, 4.0}) stack.push_back({ImageU8(16, 16, 3, 255), ms});
  EXPECT_THROW(estimate_crf(stack, 10.0), CalibrationError);
}

TEST(EstimateNoise, RecoversKnownCoefficients) {
  // sigma_s = 0.02, sigma_c = 1.5 on a curve whose radiance unit is one level.
  const ResponseCurve curve = level_curve();
  NoiseModel truth;
  truth.sigma_s.fill(0.02);
  truth.sigma_c.fill(1.5);
  const auto stack = still_stack(curve, truth, 30, 5.0, 250.0, 256);
  const NoiseModel est = estimate_noise(stack, curve);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(est.sigma_s[c], 0.02, 0.15 * 0.02) << c;
    EXPECT_NEAR(est.sigma_c[c], 1.5, 0.15 * 1.5) << c;
  }
  double mx = 0;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < kLevels; ++i) mx = std::max(mx, est.intensity_std(curve, c, i));
  EXPECT_DOUBLE_EQ(est.m, mx);
}

TEST(EstimateNoise, NoiseFreeStackGivesFloor) {
  const ResponseCurve curve = ResponseCurve::gamma(2.2);
  const auto stack = still_stack(curve, NoiseModel::none(), 10, 0.01, 2.5, 16);
  const NoiseModel est = estimate_noise(stack, curve);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(est.sigma_s[c], 0.0, 1e-9);
    EXPECT_NEAR(est.sigma_c[c], 0.0, 1e-9);
  }
  EXPECT_EQ(est.m, kNoiseFloor);
}

TEST(EstimateNoise, TooFewFrames) {
  const auto stack = still_stack(ResponseCurve::gamma(2.2), NoiseModel::none(), 5, 0.01, 2.5, 4);
  EXPECT_THROW(estimate_noise(stack, ResponseCurve::gamma(2.2)), CalibrationError);
}

TEST(EstimateNoise, TooFewLevels) {
  std::vector<ImageU8> stack(12, ImageU8(8, 8, 3, 100));
  EXPECT_THROW(estimate_noise(stack, ResponseCurve::gamma(2.2)), CalibrationError);
}

TEST(Pcf, ZeroSlopeGivesFloor) {
  const ResponseCurve curve = ResponseCurve::gamma(2.2);
  const ConfidenceTable t = build_pcf(curve, NoiseModel::uniform(0.01, 0.001, curve));
  for (int c = 0; c < 3; ++c) EXPECT_EQ(t.p[c][255], kPcfFloor);
}

TEST(Pcf, ConstantForLinearCurveAndConstantNoise) {
  const ResponseCurve curve = ResponseCurve::linear();
  NoiseModel noise;
  noise.sigma_c.fill(0.004);
  noise.m = 1.0;
  const ConfidenceTable t = build_pcf(curve, noise);
  const double expected = std::clamp(128.0 * 0.004 / 1.0, kPcfFloor, 1.0);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < kLevels; ++i) EXPECT_NEAR(t.p[c][i], expected, 1e-12);
}

TEST(Pcf, MatchesScalarOracleWithFittedNoise) {
  const ResponseCurve curve = ResponseCurve::gamma(2.2);
  NoiseModel sim;
  sim.sigma_s.fill(0.01);
  sim.sigma_c.fill(0.002);
  const NoiseModel fitted = estimate_noise(still_stack(curve, sim, 20, 0.005, 2.5, 64), curve);
  const ConfidenceTable t = build_pcf(curve, fitted);

  // Independent evaluation: m from its definition, then each entry.
  const double rmax = std::pow(255.0 / 128.0, 2.2);
  auto slope = [&](int i) { return i == 0 || i == 255 ? 0.0 : 255.0 / (2.2 * rmax) * std::pow(i / 255.0, -1.2); };
  auto level_std = [&](int c, int i) {
    const double r = rmax * std::pow(i / 255.0, 2.2);
    return slope(i) * std::sqrt(r * fitted.sigma_s[c] * fitted.sigma_s[c] + fitted.sigma_c[c] * fitted.sigma_c[c]);
  };
  double m = 0;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < kLevels; ++i) m = std::max(m, level_std(c, i));
  m = std::max(m, kNoiseFloor);
  EXPECT_NEAR(fitted.m, m, 1e-9 * m);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < kLevels; ++i) {
      const double p = std::clamp(level_std(c, i) / m, kPcfFloor, 1.0);
      EXPECT_NEAR(t.p[c][i], p, 1e-9) << c << " " << i;
    }
}

TEST(Pcf, VariantsAreOrdered) {
  const ResponseCurve curve = ResponseCurve::srgb_like();
  const ConfidenceTable t = build_pcf(curve, NoiseModel::uniform(0.01, 0.001, curve));
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < kLevels; ++i) {
      const double p = t.p[c][i];
      EXPECT_GT(p, 0.0);
      EXPECT_LE(p, 1.0);
      EXPECT_EQ(t.value(c, i, PcfVariant::P0), 1.0);
      EXPECT_GE(t.value(c, i, PcfVariant::P1), t.value(c, i, PcfVariant::P2));
      EXPECT_GE(t.value(c, i, PcfVariant::P2), t.value(c, i, PcfVariant::P3));
    }
}

TEST(Pcf, VariantNames) {
  for (PcfVariant v : {PcfVariant::P0, PcfVariant::P1, PcfVariant::P2, PcfVariant::P3})
    EXPECT_EQ(parse_pcf_variant(to_string(v)), v);
  EXPECT_THROW(parse_pcf_variant("p4"), InvalidInput);
  NoiseModel bad;
  bad.m = 0;
  EXPECT_THROW(build_pcf(ResponseCurve::linear(), bad), InvalidInput);
}

TEST(ToRadiance, MidGrayIsUnitRadiance) {
  const ResponseCurve curve = ResponseCurve::gamma(2.2);
  const Calibration cal = Calibration::from(curve, NoiseModel::uniform(0.01, 0.001, curve));
  RgbdFrame f{ImageU8(4, 3, 3, 128), ImageF(4, 3, 1, 1.0f), 10, 0};
  const RadianceFrame r = to_radiance(f, cal.curve, cal.pcf);
  for (float v : r.radiance.data()) EXPECT_NEAR(v, 1.0f, 1e-6);
  for (auto s : r.saturated.data()) EXPECT_EQ(s, 0);
  EXPECT_EQ(r.exposure_ms, 10);
}

TEST(ToRadiance, SaturatedChannelFlagsPixel) {
  const ResponseCurve curve = ResponseCurve::gamma(2.2);
  const Calibration cal = Calibration::from(curve, NoiseModel::uniform(0.01, 0.001, curve));
  RgbdFrame f{ImageU8(2, 1, 3, 100), ImageF(2, 1, 1, 1.0f), 10, 0};
  f.rgb(1, 0, 2) = 255;
  const RadianceFrame r = to_radiance(f, cal.curve, cal.pcf);
  EXPECT_EQ(r.saturated(0, 0), 0);
  EXPECT_EQ(r.saturated(1, 0), 1);
  EXPECT_EQ(r.channel_confidence(1, 0, 2), static_cast<float>(kPcfFloor));
  const double mean = (cal.pcf.p[0][100] + cal.pcf.p[1][100] + kPcfFloor) / 3;
  EXPECT_NEAR(r.confidence(1, 0), mean, 1e-6);
  f.rgb(0, 0, 0) = 0;
  EXPECT_EQ(to_radiance(f, cal.curve, cal.pcf).saturated(0, 0), 1);
}

TEST(ToRadiance, ElementwiseTableLookup) {
  const ResponseCurve curve = ResponseCurve::gamma(2.2);
  const Calibration cal = Calibration::from(curve, NoiseModel::uniform(0.02, 0.003, curve));
  RgbdFrame f{ImageU8(37, 23, 3), ImageF(37, 23, 1, 1.0f), 5, 0};
  std::mt19937 rng(29);
  std::uniform_int_distribution<int> u(0, 255);
  for (auto& v : f.rgb.data()) v = static_cast<std::uint8_t>(u(rng));
  const RadianceFrame r = to_radiance(f, cal.curve, cal.pcf);
  for (int y = 0; y < 23; ++y)
    for (int x = 0; x < 37; ++x) {
      double conf = 0;
      bool sat = false;
      for (int c = 0; c < 3; ++c) {
        const int level = f.rgb(x, y, c);
        EXPECT_FLOAT_EQ(r.radiance(x, y, c), static_cast<float>(curve.inverse(c, level)));
        EXPECT_FLOAT_EQ(r.channel_confidence(x, y, c), static_cast<float>(cal.pcf.p[c][level]));
        conf += cal.pcf.p[c][level] / 3;
        sat = sat || level == 0 || level == 255;
      }
      EXPECT_NEAR(r.confidence(x, y), conf, 1e-6);
      EXPECT_GT(r.confidence(x, y), 0.0f);
      EXPECT_LE(r.confidence(x, y), 1.0f);
      EXPECT_EQ(r.saturated(x, y) != 0, sat);
    }
}

TEST(Calibration, JsonRoundTrip) {
  const ResponseCurve curve = ResponseCurve::srgb_like();
  const Calibration cal = Calibration::from(curve, NoiseModel::uniform(0.01, 0.001, curve));
  const fs::path path = fs::temp_directory_path() / "hdrf_test_calib.json";
  save_calibration(path, cal);
  const Calibration back = load_calibration(path);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < kLevels; ++i) {
      EXPECT_NEAR(back.curve.inverse(c, i), cal.curve.inverse(c, i), 1e-12 * (1 + cal.curve.inverse(c, i)));
      EXPECT_NEAR(back.curve.derivative(c, i), cal.curve.derivative(c, i), 1e-9);
      EXPECT_NEAR(back.pcf.p[c][i], cal.pcf.p[c][i], 1e-12);
    }
    EXPECT_DOUBLE_EQ(back.noise.sigma_s[c], 0.01);
  }
  EXPECT_NEAR(back.noise.m, cal.noise.m, 1e-15);
  EXPECT_THROW(load_calibration(fs::temp_directory_path() / "hdrf_missing_calib.json"), IoError);
}
