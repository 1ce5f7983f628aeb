#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/image_io.hpp"
#include "hdrfusion/imagecore.hpp"

using namespace hdrfusion;
namespace fs = std::filesystem;

namespace {

ImageF random_map(int w, int h, int ch, std::uint32_t seed, float lo = 0, float hi = 1) {
  ImageF img(w, h, ch);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  for (float& v : img.data()) v = u(rng);
  return img;
}

// Naive clipped-window mean and population std.
void brute_stats(const ImageF& m, int r, int x, int y, int c, double& mean, double& sd) {
  double s = 0, s2 = 0;
  int n = 0;
  for (int yy = y - r; yy <= y + r; ++yy)
    for (int xx = x - r; xx <= x + r; ++xx) {
      if (!m.contains(xx, yy)) continue;
      const double v = m(xx, yy, c);
      s += v;
      s2 += v * v;
      ++n;
    }
  mean = s / n;
  sd = std::sqrt(std::max(0.0, s2 / n - mean * mean));
}

RadianceFrame radiance_frame(const ImageF& rad) {
  RadianceFrame f;
  f.radiance = rad;
  f.confidence = ImageF(rad.width(), rad.height(), 1, 1.0f);
  f.channel_confidence = ImageF(rad.width(), rad.height(), 3, 1.0f);
  f.saturated = Mask(rad.width(), rad.height(), 1, 0);
  f.exposure_ms = 10;
  return f;
}

fs::path scratch_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "hdrf_test_imagecore" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Pyramid, ConstantImageStaysConstant) {
  const auto pyr = build_pyramid(ImageF(16, 16, 3, 2.5f), 3);
  ASSERT_EQ(pyr.size(), 3u);
  for (const ImageF& level : pyr)
    for (float v : level.data()) EXPECT_EQ(v, 2.5f);
}

TEST(Pyramid, CheckerboardAveragesToHalf) {
  ImageF img(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img(x, y) = (x + y) % 2 ? 100.0f : 0.0f;
  const auto pyr = build_pyramid(img, 2);
  for (float v : pyr[1].data()) EXPECT_EQ(v, 50.0f);
}

TEST(Pyramid, LevelShapes) {
  const auto pyr = build_pyramid(random_map(64, 64, 1, 1), 3);
  EXPECT_TRUE(pyr[0].same_shape(64, 64));
  EXPECT_TRUE(pyr[1].same_shape(32, 32));
  EXPECT_TRUE(pyr[2].same_shape(16, 16));
}

TEST(Pyramid, OddDimensionsDropTrailingRow) {
  const auto pyr = build_pyramid(random_map(9, 7, 1, 2), 2);
  EXPECT_TRUE(pyr[1].same_shape(4, 3));
}

TEST(Pyramid, MeanIsPreservedOnAlignedDimensions) {
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const ImageF img = random_map(32, 48, 3, seed, 0, 50);
    const auto pyr = build_pyramid(img, 4);
    auto mean = [](const ImageF& m) {
      double s = 0;
      for (float v : m.data()) s += v;
      return s / m.data().size();
    };
    for (const ImageF& level : pyr) EXPECT_NEAR(mean(level), mean(img), 1e-4);
  }
}

TEST(Pyramid, TooManyLevelsThrows) {
  EXPECT_THROW(build_pyramid(ImageF(8, 8), 5), InvalidInput);
  EXPECT_THROW(build_pyramid(ImageF(8, 8), 0), InvalidInput);
  EXPECT_NO_THROW(check_pyramid_levels(320, 240, 3));
}

TEST(DepthPyramid, DoesNotAverageAcrossInvalidOrEdges) {
  ImageF d(4, 2, 1, 0.0f);
  // Block 0: one valid sample. Block 1: a depth edge.
  d(1, 1) = 2.0f;
  d(2, 0) = 1.0f;
  d(3, 0) = 1.0f;
  d(2, 1) = 1.0f;
  d(3, 1) = 3.0f;
  const auto pyr = build_depth_pyramid(d, 2);
  EXPECT_EQ(pyr[1](0, 0), 2.0f);
  const float edge = pyr[1](1, 0);
  EXPECT_TRUE(edge == 1.0f || edge == 3.0f) << edge;

  ImageF flat(2, 2, 1, 0.0f);
  flat(0, 0) = 1.00f;
  flat(1, 0) = 1.02f;
  flat(0, 1) = 1.04f;
  flat(1, 1) = 1.06f;
  EXPECT_NEAR(build_depth_pyramid(flat, 2)[1](0, 0), 1.03f, 1e-6);
}

TEST(MaskPyramid, AnyChildSetsParent) {
  Mask m(4, 4, 1, 0);
  m(3, 3) = 1;
  const auto pyr = build_mask_pyramid_any(m, 2);
  EXPECT_EQ(pyr[1](1, 1), 1);
  EXPECT_EQ(pyr[1](0, 0), 0);
}

TEST(LocalStats, ConstantMap) {
  const LocalStats s = local_stats(ImageF(20, 10, 1, 3.0f), 2);
  for (float v : s.mean.data()) EXPECT_FLOAT_EQ(v, 3.0f);
  for (float v : s.stddev.data()) EXPECT_NEAR(v, 0.0f, 1e-6);
}

TEST(LocalStats, MatchesBruteForceIncludingBorders) {
  // Random shapes up to 64x64 and several radii; borders use the clipped window.
  std::mt19937 rng(23);
  std::uniform_int_distribution<int> dim(8, 64), rad(1, 6);
  for (int trial = 0; trial < 12; ++trial) {
    const int w = dim(rng), h = dim(rng), r = trial == 0 ? 3 : rad(rng);
    const ImageF m = trial == 0 ? random_map(32, 32, 2, 99, 0, 1) : random_map(w, h, 2, trial, -5, 20);
    for (int c = 0; c < 2; ++c) {
      const LocalStats s = local_stats(m, r, c);
      for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
          double mean, sd;
          brute_stats(m, r, x, y, c, mean, sd);
          EXPECT_LE(std::abs(s.mean(x, y) - mean), 1e-5 * std::max(1.0, std::abs(mean)));
          EXPECT_LE(std::abs(s.stddev(x, y) - sd), 1e-5 * std::max(1.0, sd));
        }
    }
  }
}

TEST(LocalStats, SmallVarianceOnLargeOffset) {
  ImageF m = random_map(30, 30, 1, 5, 0, 1e-3f);
  for (float& v : m.data()) v += 1000.0f;
  const LocalStats s = local_stats(m, 3);
  double mean, sd;
  brute_stats(m, 3, 15, 15, 0, mean, sd);
  EXPECT_NEAR(s.stddev(15, 15), sd, 0.05 * sd);
}

TEST(LocalStats, RadiusMustBePositive) { EXPECT_THROW(local_stats(ImageF(4, 4), 0), InvalidInput); }

TEST(WindowCount, CountsClippedWindows) {
  Mask m(5, 5, 1, 1);
  const Image<int> c = window_count(m, 1);
  EXPECT_EQ(c(0, 0), 4);
  EXPECT_EQ(c(2, 2), 9);
  EXPECT_EQ(c(4, 2), 6);
}

TEST(Normalize, ScaleCancels) {
  const ImageF r1 = random_map(40, 30, 3, 7, 0.1f, 2);
  ImageF r2 = r1;
  for (float& v : r2.data()) v *= 2.0f;
  const auto n1 = normalize_radiance(radiance_frame(r1), 5), n2 = normalize_radiance(radiance_frame(r2), 5);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) {
      ASSERT_EQ(n1.valid(x, y), n2.valid(x, y));
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(n1.nr(x, y, c), n2.nr(x, y, c), 1e-5);
    }
}

TEST(Normalize, ExposureInvarianceForAnyScale) {
  const ImageF r = random_map(32, 32, 3, 8, 0.05f, 3);
  const auto base = normalize_radiance(radiance_frame(r), 4);
  for (float k : {0.01f, 0.3f, 7.0f, 250.0f}) {
    ImageF s = r;
    for (float& v : s.data()) v *= k;
    const auto n = normalize_radiance(radiance_frame(s), 4);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        if (!base.valid(x, y) || !n.valid(x, y)) continue;
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(n.nr(x, y, c), base.nr(x, y, c), 1e-4);
      }
  }
}

TEST(Normalize, ConstantRadianceIsInvalid) {
  const auto n = normalize_radiance(radiance_frame(ImageF(10, 10, 3, 0.7f)), 2);
  for (auto v : n.valid.data()) EXPECT_EQ(v, 0);
}

TEST(Normalize, ReconstructionIdentity) {
  const ImageF r = random_map(25, 20, 3, 9, 0, 4);
  const auto n = normalize_radiance(radiance_frame(r), 3);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 25; ++x) {
      ASSERT_TRUE(n.valid(x, y));
      for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(n.nr(x, y, c) * n.sigma(x, y, c) + n.mu(x, y, c), r(x, y, c), 1e-5);
        EXPECT_GE(n.sigma(x, y, c), kSigmaFloor);
      }
    }
}

TEST(Normalize, SaturationAndDepthInvalidate) {
  RadianceFrame f = radiance_frame(random_map(20, 20, 3, 10, 0, 1));
  f.saturated(10, 10) = 1;
  ImageF depth(20, 20, 1, 1.0f);
  depth(2, 2) = 0.0f;
  const auto n = normalize_radiance(f, 2, &depth);
  EXPECT_FALSE(n.valid(10, 10));
  EXPECT_FALSE(n.valid(12, 8));  // window touches the saturated pixel
  EXPECT_TRUE(n.valid(13, 10));
  EXPECT_FALSE(n.valid(2, 2));
  EXPECT_TRUE(n.valid(3, 2));
  EXPECT_EQ(mean_normalized(n)(10, 10), 0.0f);
}

TEST(Normalize, PatchRadiusPerLevel) {
  EXPECT_EQ(patch_radius_for_level(0), 5);
  EXPECT_EQ(patch_radius_for_level(1), 2);
  EXPECT_EQ(patch_radius_for_level(2), 2);
  EXPECT_EQ(patch_radius_for_level(0, 8), 8);
  EXPECT_EQ(patch_radius_for_level(1, 8), 4);
}

TEST(ChannelMean, U8AndFloat) {
  ImageU8 u(1, 1, 3);
  u(0, 0, 0) = 10;
  u(0, 0, 1) = 20;
  u(0, 0, 2) = 60;
  EXPECT_FLOAT_EQ(channel_mean(u)(0, 0), 30.0f);
  ImageF f(1, 1, 3);
  f(0, 0, 0) = 1;
  f(0, 0, 2) = 2;
  EXPECT_FLOAT_EQ(channel_mean(f)(0, 0), 1.0f);
}

TEST(Sequence, TrajectoryRoundTrip) {
  const fs::path dir = scratch_dir("traj");
  std::vector<StampedPose> poses;
  for (int i = 0; i < 5; ++i) {
    Vec6 x;
    x << 0.1 * i, -0.2, 0.3, 0.05 * i, 0.1, -0.2;
    poses.push_back({i / 30.0, Pose::exp(x)});
  }
  write_trajectory(dir / "t.txt", poses);
  const auto back = read_trajectory(dir / "t.txt");
  ASSERT_EQ(back.size(), poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    // Written with 6 decimals for time and 9 for the pose.
    EXPECT_NEAR(back[i].timestamp, poses[i].timestamp, 1e-6);
    EXPECT_LT((back[i].pose.translation - poses[i].pose.translation).norm(), 1e-8);
    EXPECT_LT((back[i].pose.rotation - poses[i].pose.rotation).norm(), 1e-8);
  }
}

TEST(Sequence, TrajectorySkipsComments) {
  const fs::path dir = scratch_dir("comments");
  std::ofstream(dir / "t.txt") << "# timestamp tx ty tz qx qy qz qw\n0 1 2 3 0 0 0 1\n";
  const auto t = read_trajectory(dir / "t.txt");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].pose.translation, Vec3(1, 2, 3));
}

TEST(Sequence, ReaderLoadsFramesAndConvertsDepth) {
  const fs::path dir = scratch_dir("seq");
  fs::create_directories(dir / "rgb");
  fs::create_directories(dir / "depth");
  const CameraModel cam{50, 50, 3.5, 2.5, 8, 6};
  write_camera_json(dir / "camera.json", cam);
  ImageU8 rgb(8, 6, 3, 77);
  ImageU16 depth(8, 6, 1, 1500);
  depth(0, 0) = 0;
  io::write_png8(dir / "rgb" / frame_name(3, "png"), rgb);
  io::write_png16(dir / "depth" / frame_name(3, "png"), depth);
  std::ofstream(dir / "exposure.csv") << "index,exposure_ms\n3,24\n";

  const SequenceReader seq(dir);
  EXPECT_EQ(seq.camera(), cam);
  ASSERT_EQ(seq.size(), 1u);
  EXPECT_EQ(seq.frame_index(0), 3);
  EXPECT_DOUBLE_EQ(seq.exposure_ms(0), 24);
  EXPECT_TRUE(seq.ground_truth().empty());
  const RgbdFrame f = seq.frame(0);
  EXPECT_EQ(f.rgb, rgb);
  EXPECT_FLOAT_EQ(f.depth(1, 1), 1.5f);
  EXPECT_EQ(f.depth(0, 0), 0.0f);
  EXPECT_DOUBLE_EQ(f.exposure_ms, 24);
}

TEST(Sequence, MissingDirectoryIsIoError) {
  EXPECT_THROW(SequenceReader(fs::temp_directory_path() / "hdrf_no_such_sequence"), IoError);
}

TEST(Sequence, FrameNames) { EXPECT_EQ(frame_name(42, "png"), "000042.png"); }
