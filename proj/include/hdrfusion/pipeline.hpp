#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hdrfusion/mapper.hpp"
#include "hdrfusion/synth.hpp"
#include "hdrfusion/tracker.hpp"

namespace hdrfusion {

enum class TrackingMode { FrameToModel, FrameToFrame };

TrackingMode parse_tracking_mode(const std::string& name);
const char* to_string(TrackingMode m);

struct PipelineConfig {
  std::filesystem::path sequence;
  std::filesystem::path calib;
  std::filesystem::path output = "out";
  TrackingMode mode = TrackingMode::FrameToModel;

  TrackerConfig tracker;
  VolumeConfig volume;
  FusionParams fusion;
  ExposureOptions exposure;

  int prediction_every = 10;  // write pred/%06d.pfm every N frames; 0 disables
  int max_frames = 0;         // 0 = whole sequence
  /// Larger inter-frame motion than this counts as divergence.
  double max_step_translation = 0.1;
  double max_step_rotation_deg = 10.0;

  SequenceSpec synth;
  bool synth_calibration_stacks = true;

  void validate() const;
};

/// Overlays the keys present in `text` (JSON) onto `base`.
PipelineConfig parse_config(const std::string& text, const PipelineConfig& base = {});
PipelineConfig load_config(const std::filesystem::path& path, const PipelineConfig& base = {});
/// Full configuration as pretty JSON.
std::string config_to_json(const PipelineConfig& cfg);

struct FrameLog {
  int frame = 0;
  double exposure_ms = 0;
  double exposure_scale = 1;
  bool scale_fallback = false;
  double residual_rms = 0;
  double valid_fraction = 0;
  int iterations = 0;
  bool diverged = false;
};

struct PipelineResult {
  std::vector<StampedPose> trajectory;  // camera -> model world (frame 0 camera)
  std::vector<FrameLog> log;
  int diverged_frames = 0;
  TsdfVolume volume;
  CameraModel camera;
};

/// Frame 0 seeds the volume at identity; every later frame is tracked
/// against the last prediction, exposure-compensated, fused and raycast.
/// Writes outputs under cfg.output when `write_outputs` is set.
PipelineResult run_pipeline(const PipelineConfig& cfg, bool write_outputs = true);

void write_tracking_log(const std::filesystem::path& path, const std::vector<FrameLog>& log);

}  // namespace hdrfusion
