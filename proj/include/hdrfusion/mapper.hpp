#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "hdrfusion/geometry.hpp"
#include "hdrfusion/image.hpp"
#include "hdrfusion/imagecore.hpp"
#include "hdrfusion/radiometric.hpp"
#include "hdrfusion/tracker.hpp"

namespace hdrfusion {

/// One voxel record, 9 floats in file order.
struct Voxel {
  float F = 0;                       // truncated signed distance / delta, in [-1, 1]
  float wF = 0;                      // geometry weight
  std::array<float, 3> R{0, 0, 0};   // radiance
  std::array<float, 3> nr{0, 0, 0};  // normalized radiance
  float wR = 0;                      // radiance weight
};
static_assert(sizeof(Voxel) == 9 * sizeof(float));

struct VolumeConfig {
  int dims = 128;
  double extent = 3.0;  // meters per axis
  // Sized for the default sweep, which drifts right of the first camera.
  Vec3 origin{-1.0, -1.1, 0.2};
  /// Truncation in voxels; delta = truncation_voxels * voxel_size.
  double truncation_voxels = 4.0;
  float w_max = 128.0f;

  double voxel_size() const { return extent / dims; }
  void validate() const;
};

/// Dense TSDF + radiance grid. Voxel (i, j, k) has its center at
/// origin + voxel_size * (i, j, k); storage is x fastest.
class TsdfVolume {
 public:
  TsdfVolume() = default;
  explicit TsdfVolume(const VolumeConfig& cfg);
  TsdfVolume(const Eigen::Vector3i& dims, double voxel_size, const Vec3& origin, double truncation,
             float w_max);

  const Eigen::Vector3i& dims() const { return dims_; }
  double voxel_size() const { return voxel_size_; }
  const Vec3& origin() const { return origin_; }
  double truncation() const { return truncation_; }
  float w_max() const { return w_max_; }
  std::size_t size() const { return voxels_.size(); }

  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * dims_.y() + y) * dims_.x() + x;
  }
  Voxel& at(int x, int y, int z) { return voxels_[index(x, y, z)]; }
  const Voxel& at(int x, int y, int z) const { return voxels_[index(x, y, z)]; }
  std::vector<Voxel>& voxels() { return voxels_; }
  const std::vector<Voxel>& voxels() const { return voxels_; }

  Vec3 voxel_center(int x, int y, int z) const {
    return origin_ + voxel_size_ * Vec3(x, y, z);
  }
  /// True when no voxel has been observed.
  bool empty() const;

 private:
  Eigen::Vector3i dims_ = Eigen::Vector3i::Zero();
  double voxel_size_ = 0;
  Vec3 origin_ = Vec3::Zero();
  double truncation_ = 0;
  float w_max_ = 0;
  std::vector<Voxel> voxels_;
};

/// Weighted running mean of F; weight capped at w_max.
void fuse_geometry(Voxel& v, float f, float w, float w_max);
/// Weighted running mean of R and R-bar; weight capped at w_max.
void fuse_radiance(Voxel& v, const std::array<float, 3>& radiance, const std::array<float, 3>& nr, float w,
                   float w_max);

struct FusionParams {
  double tau0 = 0.2;   // per-channel PCF maximum must exceed this
  double tau1 = 0.17;  // |n . v| must exceed this
};

/// Per-pixel inputs of one integration step.
struct FusionFrame {
  ImageF depth;               // meters
  ImageF radiance;            // 3 channels, already in model units
  ImageF nr;                  // 3 channels
  Mask nr_valid;
  ImageF confidence;          // w_R' = mean of channel PCF values
  ImageF channel_confidence;  // 3 channels
  Mask saturated;
};

/// Builds a FusionFrame from a radiance frame scaled by `exposure_scale`.
FusionFrame make_fusion_frame(const RadianceFrame& rad, const ImageF& depth, double exposure_scale,
                              int patch_radius = kDefaultPatchRadius);

/// Unit normals from the live depth map, facing the camera; invalid where
/// the neighborhood lacks depth. 3 channels, zero on invalid pixels.
ImageF depth_normals(const ImageF& depth, const CameraModel& cam);

/// Gather-style fusion of one frame. `camera_to_world` is the frame pose.
void integrate(TsdfVolume& volume, const FusionFrame& frame, const CameraModel& cam,
               const Pose& camera_to_world, const FusionParams& params = {});

/// Marches rays at step delta/2 and returns the predicted maps at
/// `camera_to_world`.
SurfacePrediction raycast(const TsdfVolume& volume, const Pose& camera_to_world, const CameraModel& cam);

struct ExposureScale {
  double scale = 1.0;
  std::size_t count = 0;
};

struct ExposureOptions {
  PcfVariant variant = PcfVariant::P2;
  double depth_gate = 0.1;
  double min_valid_fraction = 0.1;
  /// Weighted mean of per-pixel ratios instead of the ratio of weighted
  /// sums. Biased upward where the model is blurrier than the live frame.
  bool per_pixel_ratio = false;
  /// With per_pixel_ratio, divide by the pixel count instead of the weight sum.
  bool literal_omega = false;
};

/// Scale s with s * R_live ~ R_model from correspondences under
/// `ref_to_live`, on luminance (channel sum).
ExposureScale estimate_exposure_scale(const SurfacePrediction& pred, const RadianceFrame& live,
                                      const ImageF& live_depth, const CameraModel& cam, const Pose& ref_to_live,
                                      const ExposureOptions& opt = {});

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<std::array<float, 3>> radiance;
};

/// World-frame points of all valid prediction pixels; radiance is zero where
/// nothing was fused.
PointCloud extract_pointcloud(const SurfacePrediction& pred, const CameraModel& cam);
/// Zero crossings of F between observed neighbors, along each axis.
PointCloud extract_pointcloud(const TsdfVolume& volume);
/// ASCII PLY. Throws InvalidInput on an empty cloud.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

/// Header: 3 int32 dims, float voxel_size, 3 float origin, float delta;
/// then x-fastest little-endian voxel records.
void write_volume(const std::filesystem::path& path, const TsdfVolume& volume);
TsdfVolume read_volume(const std::filesystem::path& path);

}  // namespace hdrfusion
