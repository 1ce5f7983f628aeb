#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hdrfusion/geometry.hpp"
#include "hdrfusion/image.hpp"
#include "hdrfusion/imagecore.hpp"
#include "hdrfusion/radiometric.hpp"

namespace hdrfusion {

/// Maps rendered from the model at one camera pose.
struct SurfacePrediction {
  ImageF depth;          // z in meters, 0 where invalid
  ImageF normals;        // 3 channels, unit length on valid pixels
  ImageF radiance;       // 3 channels, model radiance units
  ImageF nr;             // 3 channels, fused normalized radiance
  ImageF confidence;     // fused radiance weight w_R
  ImageF weight;         // fused geometry weight w_F
  Mask valid;            // surface hit
  Mask radiance_valid;   // surface hit with w_R > 0
  Pose pose;             // camera -> world

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
  std::size_t valid_count() const;
};

enum class Objective { RawIntensity, Ncc, CompRadiance, NormRadiance };

Objective parse_objective(const std::string& name);
const char* to_string(Objective o);

struct TrackerConfig {
  int pyramid_levels = 3;
  /// Iterations per level, coarse to fine. The last entry repeats when
  /// there are fewer entries than levels.
  std::vector<int> max_iterations{10, 7, 5};
  Objective objective = Objective::NormRadiance;
  PcfVariant pcf_variant = PcfVariant::P1;
  double convergence_eps = 1e-6;
  double min_valid_fraction = 0.1;
  /// Maximum |predicted depth - live depth| for a correspondence, meters.
  double depth_gate = 0.1;
  int patch_radius = kDefaultPatchRadius;
  int ncc_radius = 3;
  /// Reference level 0 takes the volume's fused normalized radiance; when
  /// false it is recomputed from the predicted radiance like coarser levels.
  bool use_fused_nr = true;

  int iterations_at(int level) const;
  void validate() const;
};

/// One pyramid level of a frame prepared for a given objective.
struct TrackingLevel {
  CameraModel camera;
  ImageF value;     // objective signal: mean R-bar, gray intensity, or luminance radiance
  ImageF weight;    // per-pixel residual weight (PCF variant for NORM_RADIANCE, else 1)
  ImageF depth;     // meters, 0 = invalid
  Mask valid;       // value usable
};

struct TrackingFrame {
  Objective objective = Objective::NormRadiance;
  std::vector<TrackingLevel> levels;
  std::size_t reference_valid(int level) const;
};

/// Live or reference frame from a captured RGB-D frame.
TrackingFrame prepare_frame(const RgbdFrame& frame, const CameraModel& cam, const Calibration& calib,
                            const TrackerConfig& cfg);
/// Reference from a model prediction; RAW and NCC use f(R_pred) as intensity.
TrackingFrame prepare_prediction(const SurfacePrediction& pred, const CameraModel& cam,
                                 const Calibration& calib, const TrackerConfig& cfg);

struct ObjectiveValue {
  double cost = 0;
  std::size_t count = 0;
  double valid_fraction = 0;
};

/// Cost at `pose` (reference -> live) on one pyramid level. For
/// COMP_RADIANCE `scale` multiplies the live radiance. Throws
/// InsufficientOverlap below cfg.min_valid_fraction.
ObjectiveValue evaluate_objective(const TrackingFrame& ref, const TrackingFrame& live, int level,
                                  const Pose& pose, const TrackerConfig& cfg, double scale = 1.0);

/// Correspondences frozen at one pose, for gradient checks.
struct Correspondences {
  std::vector<int> pixels;  // reference pixel indices y * w + x
};

Correspondences collect_correspondences(const TrackingFrame& ref, const TrackingFrame& live, int level,
                                        const Pose& pose, const TrackerConfig& cfg);

/// NORM_RADIANCE cost over a fixed correspondence set and its analytic
/// gradient with respect to a left-multiplied twist (t, w).
struct CostGradient {
  double cost = 0;
  Vec6 gradient = Vec6::Zero();
};
CostGradient norm_radiance_cost_gradient(const TrackingFrame& ref, const TrackingFrame& live, int level,
                                         const Pose& pose, const Correspondences& set);

struct TrackResult {
  Pose pose;
  double residual_rms = 0;
  double valid_fraction = 0;
  bool converged = false;
  std::vector<int> iterations;  // per level, coarse to fine
  double exposure_scale = 1.0;  // COMP_RADIANCE only
};

/// Coarse-to-fine Gauss-Newton, forward compositional. Returns the initial
/// pose with converged = false if the optimization produces non-finite values.
TrackResult track_frame(const TrackingFrame& ref, const TrackingFrame& live, const Pose& init,
                        const TrackerConfig& cfg);

struct ErrorSurface {
  Objective objective = Objective::NormRadiance;
  int axis = 0;
  std::vector<std::pair<double, double>> samples;  // (offset, cost); NaN cost when overlap fails

  double argmin() const;
};

/// Level-0 cost over exp(offset * e_axis) * center for offsets in [lo, hi].
ErrorSurface error_surface(const TrackingFrame& ref, const TrackingFrame& live, const Pose& center,
                           const TrackerConfig& cfg, int axis, double lo, double hi, double step);

void write_error_surface(const std::filesystem::path& path, const ErrorSurface& surface);

}  // namespace hdrfusion
