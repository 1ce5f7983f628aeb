#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hdrfusion/geometry.hpp"
#include "hdrfusion/image.hpp"
#include "hdrfusion/imagecore.hpp"
#include "hdrfusion/radiometric.hpp"

namespace hdrfusion {

/// Ground-truth render: scene luminance per channel and exact depth.
struct HdrSourceFrame {
  ImageF hdr;    // 3 channels, luminance L
  ImageF depth;  // camera z, meters; 0 where no surface
  Pose pose;     // camera -> world
  double timestamp = 0;
};

/// Counter-based seed derivation (splitmix64).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

/// Default QVGA camera used by the synthetic sequences.
CameraModel qvga_camera();

struct AxisPlane {
  int axis = 2;          // plane normal axis
  double position = 0;   // coordinate along the axis
  Vec3 tint{1, 1, 1};    // per-channel albedo factor
};

struct AxisBox {
  Vec3 lo, hi;
  Vec3 tint{1, 1, 1};
};

struct SpotLight {
  Vec3 center;
  double peak = 0;   // luminance added at the center
  double sigma = 0;  // meters
};

/// Lambertian scene of axis-aligned planes and boxes with value-noise albedo
/// in [0.1, 1] under smooth illumination.
class Scene {
 public:
  /// Desk-scale room with two boxes, a left-to-right ambient gradient and
  /// spotlights; luminance spans more than three orders of magnitude.
  static Scene room();
  /// Single textured plane z = depth under uniform illumination `level`.
  static Scene plane(double depth, double level = 2.0e4);

  /// Renders luminance (averaged over supersample^2 rays) and exact depth.
  /// Throws InvalidInput when the camera center lies outside the scene bounds.
  HdrSourceFrame render_view(const Pose& camera_to_world, const CameraModel& cam, int supersample = 2) const;

  /// Luminance at a surface point with in-plane texture coordinates.
  Vec3 shade(const Vec3& p, int surface, int axis, const Vec3& tint) const;
  double illumination(const Vec3& p) const;
  bool contains(const Vec3& p) const;

  std::vector<AxisPlane> planes;
  std::vector<AxisBox> boxes;
  std::vector<SpotLight> spots;
  double ambient = 2.0e4;
  double ambient_slope = 0;  // log-luminance change per meter along x
  Vec3 bounds_lo{-1e9, -1e9, -1e9}, bounds_hi{1e9, 1e9, 1e9};
  double texture_cell = 0.2;
  double detail_cell = 0.07;
  double fine_cell = 0.06;
  double texture_contrast = 2.5;
};

/// Camera -> world poses of the default sweep: x from -0.25 to 0.25 m, a
/// forward bob, yaw -10 to +10 degrees and a small pitch.
std::vector<Pose> default_trajectory(int frames);

/// Forward imaging model: R = L * exposure_ms * gain, signal-dependent and
/// constant Gaussian noise, I = clamp(round(f(R + n)), 0, 255).
RgbdFrame simulate_ldr(const HdrSourceFrame& src, double exposure_ms, const ResponseCurve& curve,
                       const NoiseModel& noise, std::uint64_t seed, double gain = 1.0);

enum class ScheduleMode { Flicker, Smooth };

ScheduleMode parse_schedule_mode(const std::string& name);
const char* to_string(ScheduleMode m);

struct ExposureSchedule {
  ScheduleMode mode = ScheduleMode::Flicker;
  std::vector<double> exposure_ms;
  std::uint64_t seed = 0;
  double C = 0;
};

inline constexpr double kFlickerExposures[6] = {3, 6, 12, 24, 48, 96};
inline constexpr double kDefaultExposureConstant = 4.8e5;
inline constexpr double kMinExposureMs = 1.0;
inline constexpr double kMaxExposureMs = 200.0;

/// I.i.d. uniform draws from kFlickerExposures.
ExposureSchedule flicker_schedule(int frames, std::uint64_t seed);
/// Mean HDR value over the centered 10 x 10 patch, all channels.
double center_patch_mean(const ImageF& hdr, int patch = 10);
/// C / L-bar clamped to [kMinExposureMs, kMaxExposureMs]; L-bar = 0 gives the maximum.
double smooth_exposure(const ImageF& hdr, double C = kDefaultExposureConstant);
ExposureSchedule smooth_schedule(std::span<const HdrSourceFrame> sources, double C = kDefaultExposureConstant);

/// d' = d + N(0, a + b d^2) on valid pixels.
ImageF depth_noise(const ImageF& depth, std::uint64_t seed, double a = 0.0012, double b = 0.0019);

/// Synthetic sensor of the generated sequences.
struct SensorModel {
  ResponseCurve curve = ResponseCurve::srgb_like();
  double sigma_s = 0.01;
  double sigma_c = 0.001;
  /// Radiance per luminance-millisecond; C * gain = 1 puts auto-exposed
  /// patches at radiance 1.
  double gain = 1.0 / kDefaultExposureConstant;

  NoiseModel noise() const { return NoiseModel::uniform(sigma_s, sigma_c, curve); }
  Calibration calibration() const { return Calibration::from(curve, noise()); }
};

struct SequenceSpec {
  int frames = 100;
  ScheduleMode mode = ScheduleMode::Flicker;
  std::uint64_t seed = 1;
  double C = kDefaultExposureConstant;
  bool add_noise = true;
  bool add_depth_noise = true;
  int supersample = 2;
  CameraModel camera = qvga_camera();
  SensorModel sensor;
};

/// Writes rgb/, depth/, hdr/, exposure.csv, camera.json, groundtruth.txt
/// (timestamps index / 30) and calib.json (the true sensor calibration).
void write_sequence(const std::filesystem::path& dir, const Scene& scene, const SequenceSpec& spec);

/// Writes exposure_stack/ (static view, exposures 1..128 ms doubling, with
/// exposure.csv) and noise_stack/ (12 frames at one exposure).
void write_calibration_stacks(const std::filesystem::path& dir, const Scene& scene, const SequenceSpec& spec);

}  // namespace hdrfusion
