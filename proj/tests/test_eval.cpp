#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/eval.hpp"

using namespace hdrfusion;
namespace fs = std::filesystem;

namespace {

std::vector<Pose> random_trajectory(int n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Pose> out;
  for (int i = 0; i < n; ++i) {
    Vec6 x;
    for (int k = 0; k < 6; ++k) x[k] = u(rng) * (k < 3 ? 2.0 : 0.8);
    out.push_back(Pose::exp(x));
  }
  return out;
}

Pose perturb(const Pose& p, std::mt19937& rng, double scale) {
  std::normal_distribution<double> n(0, scale);
  Vec6 x;
  for (int k = 0; k < 6; ++k) x[k] = n(rng);
  return Pose::exp(x) * p;
}

// Per-frame errors with quaternions and explicit alignment.
void oracle(const std::vector<Pose>& est, const std::vector<Pose>& gt, std::vector<double>& terr,
            std::vector<double>& rerr) {
  const Eigen::Quaterniond qa = gt[0].quaternion() * est[0].quaternion().conjugate();
  const Vec3 ta = gt[0].translation - qa * est[0].translation;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const Eigen::Quaterniond qe = qa * est[i].quaternion();
    const Vec3 te = qa * est[i].translation + ta;
    terr.push_back((te - gt[i].translation).norm());
    rerr.push_back(qe.angularDistance(gt[i].quaternion()) * 180.0 / M_PI);
  }
}

ImageF random_hdr(int w, int h, std::uint32_t seed) {
  ImageF img(w, h, 3);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> e(-4, 3);
  for (float& v : img.data()) v = static_cast<float>(std::pow(10.0, e(rng)));
  return img;
}

}  // namespace

TEST(TrajectoryErrors, IdenticalIsZero) {
  const auto gt = random_trajectory(20, 1);
  const TrajectoryReport r = trajectory_errors(gt, gt);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    EXPECT_NEAR(r.trans_err_m[i], 0, 1e-12);
    EXPECT_NEAR(r.rot_err_deg[i], 0, 1e-5);
  }
  EXPECT_NEAR(r.ate_rmse_m, 0, 1e-12);
}

TEST(TrajectoryErrors, ConstantOffsetAfterFirstFrame) {
  const auto gt = random_trajectory(10, 2);
  auto est = gt;
  for (std::size_t i = 1; i < est.size(); ++i) est[i].translation += Vec3(0.03, 0.0, 0.04);
  const TrajectoryReport r = trajectory_errors(est, gt);
  EXPECT_NEAR(r.trans_err_m[0], 0, 1e-12);
  for (std::size_t i = 1; i < est.size(); ++i) EXPECT_NEAR(r.trans_err_m[i], 0.05, 1e-12);
  EXPECT_NEAR(r.final_drift_m, 0.05, 1e-12);
  EXPECT_NEAR(r.ate_rmse_m, 0.05 * std::sqrt(9.0 / 10.0), 1e-12);
}

TEST(TrajectoryErrors, MatchesScalarOracle) {
  std::mt19937 rng(3);
  const auto gt = random_trajectory(50, 4);
  std::vector<Pose> est;
  for (const Pose& p : gt) est.push_back(perturb(p, rng, 0.05));
  std::vector<double> terr, rerr;
  oracle(est, gt, terr, rerr);
  const TrajectoryReport r = trajectory_errors(est, gt);
  double sq = 0, mx = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    EXPECT_NEAR(r.trans_err_m[i], terr[i], 1e-9);
    EXPECT_NEAR(r.rot_err_deg[i], rerr[i], 1e-6);
    EXPECT_GE(r.trans_err_m[i], 0);
    EXPECT_GE(r.rot_err_deg[i], 0);
    sq += terr[i] * terr[i];
    mx = std::max(mx, terr[i]);
  }
  EXPECT_NEAR(r.ate_rmse_m, std::sqrt(sq / gt.size()), 1e-9);
  EXPECT_LE(r.ate_rmse_m, mx + 1e-15);
}

TEST(TrajectoryErrors, InvariantToCommonRigidTransform) {
  std::mt19937 rng(5);
  const auto gt = random_trajectory(30, 6);
  std::vector<Pose> est;
  for (const Pose& p : gt) est.push_back(perturb(p, rng, 0.02));
  Vec6 x;
  x << 3, -1, 0.5, 0.7, -0.2, 1.9;
  const Pose t = Pose::exp(x);
  std::vector<Pose> gt2, est2;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt2.push_back(t * gt[i]);
    est2.push_back(t * est[i]);
  }
  const TrajectoryReport a = trajectory_errors(est, gt), b = trajectory_errors(est2, gt2);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    EXPECT_NEAR(a.trans_err_m[i], b.trans_err_m[i], 1e-9);
    EXPECT_NEAR(a.rot_err_deg[i], b.rot_err_deg[i], 1e-6);
  }
}

TEST(TrajectoryErrors, LengthMismatchThrows) {
  EXPECT_THROW(trajectory_errors(random_trajectory(3, 1), random_trajectory(4, 1)), InvalidInput);
}

TEST(TrajectoryErrors, ReportFiles) {
  const auto gt = random_trajectory(4, 7);
  auto est = gt;
  est[3].translation.x() += 0.1;
  const TrajectoryReport r = trajectory_errors(est, gt);
  const fs::path dir = fs::temp_directory_path() / "hdrf_test_eval";
  fs::create_directories(dir);
  write_report_csv(dir / "report.csv", r);
  write_report_json(dir / "report.json", r);
  std::ifstream csv(dir / "report.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "frame,rot_err_deg,trans_err_m");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, 4);
  const nlohmann::json j = nlohmann::json::parse(std::ifstream(dir / "report.json"));
  EXPECT_NEAR(j.at("ate_rmse_m").get<double>(), r.ate_rmse_m, 1e-12);
  EXPECT_NEAR(j.at("final_drift_m").get<double>(), 0.1, 1e-9);
  EXPECT_TRUE(j.contains("mean_rot_err_deg"));
}

TEST(ToneMap, UniformInUniformOut) {
  const ImageU8 out = tone_map(ImageF(8, 8, 3, 3.7f));
  for (auto v : out.data()) EXPECT_EQ(v, out.data()[0]);
}

TEST(ToneMap, MonotoneInLuminance) {
  ImageF ramp(200, 1, 3);
  for (int x = 0; x < 200; ++x)
    for (int c = 0; c < 3; ++c) ramp(x, 0, c) = static_cast<float>(std::pow(10.0, -3 + 6.0 * x / 199));
  const ImageU8 out = tone_map(ramp);
  for (int x = 1; x < 200; ++x) EXPECT_GE(out(x, 0, 1), out(x - 1, 0, 1));
  EXPECT_EQ(out(199, 0, 0), 255);
}

TEST(ToneMap, InvariantToGlobalScale) {
  const ImageF hdr = random_hdr(40, 30, 8);
  const ImageU8 a = tone_map(hdr);
  for (float k : {2.0f, 0.001f, 1000.0f}) {
    ImageF s = hdr;
    for (float& v : s.data()) v *= k;
    const ImageU8 b = tone_map(s);
    for (std::size_t i = 0; i < a.data().size(); ++i) EXPECT_LE(std::abs(a.data()[i] - b.data()[i]), 1) << k;
  }
}

TEST(ToneMap, AllZeroThrows) { EXPECT_THROW(tone_map(ImageF(4, 4, 3, 0.0f)), InvalidInput); }

TEST(RadianceError, IdenticalAndScaled) {
  const ImageF gt = random_hdr(20, 10, 9);
  const Mask all(20, 10, 1, 1);
  RadianceErrorReport r = radiance_error(gt, gt, all);
  EXPECT_NEAR(r.scale, 1.0, 1e-12);
  EXPECT_NEAR(r.relative_rms, 0.0, 1e-6);
  EXPECT_EQ(r.count, 200u);
  ImageF twice = gt;
  for (float& v : twice.data()) v *= 2;
  r = radiance_error(twice, gt, all);
  EXPECT_NEAR(r.scale, 0.5, 1e-12);
  EXPECT_NEAR(r.relative_rms, 0.0, 1e-6);
}

TEST(RadianceError, ClosedFormLeastSquares) {
  const ImageF gt = random_hdr(30, 20, 10), est = random_hdr(30, 20, 11);
  Mask m(30, 20, 1, 0);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x) m(x, y) = (x * 7 + y * 3) % 5 != 0;
  double eg = 0, ee = 0;
  std::size_t n = 0;
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x) {
      if (!m(x, y)) continue;
      ++n;
      for (int c = 0; c < 3; ++c) {
        eg += static_cast<double>(est(x, y, c)) * gt(x, y, c);
        ee += static_cast<double>(est(x, y, c)) * est(x, y, c);
      }
    }
  const double s = eg / ee;
  double num = 0, den = 0;
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x) {
      if (!m(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        const double d = s * est(x, y, c) - gt(x, y, c);
        num += d * d;
        den += static_cast<double>(gt(x, y, c)) * gt(x, y, c);
      }
    }
  const RadianceErrorReport r = radiance_error(est, gt, m);
  EXPECT_NEAR(r.scale, s, 1e-9 * s);
  EXPECT_NEAR(r.relative_rms, std::sqrt(num / den), 1e-6);
  EXPECT_EQ(r.count, n);
}

TEST(RadianceError, EmptyMaskThrows) {
  EXPECT_THROW(radiance_error(ImageF(4, 4, 3, 1.0f), ImageF(4, 4, 3, 1.0f), Mask(4, 4, 1, 0)), InvalidInput);
}
