#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "hdrfusion/geometry.hpp"
#include "hdrfusion/image.hpp"

namespace hdrfusion {

struct TrajectoryReport {
  std::vector<double> rot_err_deg;
  std::vector<double> trans_err_m;
  double ate_rmse_m = 0;
  double final_drift_m = 0;
  double mean_rot_err_deg = 0;
};

/// Errors of camera -> world poses after mapping the estimate's first pose
/// onto the ground truth's first pose.
TrajectoryReport trajectory_errors(std::span<const Pose> estimated, std::span<const Pose> ground_truth);

/// `frame,rot_err_deg,trans_err_m` rows.
void write_report_csv(const std::filesystem::path& path, const TrajectoryReport& report);
/// {ate_rmse_m, final_drift_m, mean_rot_err_deg}.
void write_report_json(const std::filesystem::path& path, const TrajectoryReport& report);

/// Global log-average operator: key / log-average scaling, L / (1 + L),
/// normalized to the maximum, color reattached as (C / L)^saturation, then
/// gamma 1/2.2. Throws InvalidInput on all-zero input.
ImageU8 tone_map(const ImageF& hdr, double saturation = 0.6, double key = 0.18);

struct RadianceErrorReport {
  double scale = 1.0;         // s minimizing |s * est - gt|^2
  double relative_rms = 0.0;  // |s * est - gt| / |gt|
  std::size_t count = 0;      // masked pixels
};

/// Compares all channels on the pixels set in `valid`. Throws InvalidInput
/// on an empty mask.
RadianceErrorReport radiance_error(const ImageF& est, const ImageF& gt, const Mask& valid);

}  // namespace hdrfusion
