#include <algorithm>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/mapper.hpp"

namespace hdrfusion {

void VolumeConfig::validate() const {
  if (dims < 2) throw InvalidInput("volume needs at least 2 voxels per axis");
  if (!(extent > 0)) throw InvalidInput("volume extent must be positive");
  if (!(truncation_voxels > 0)) throw InvalidInput("truncation must be positive");
  if (!(w_max > 0)) throw InvalidInput("w_max must be positive");
  if (!origin.allFinite()) throw InvalidInput("volume origin must be finite");
}

TsdfVolume::TsdfVolume(const VolumeConfig& cfg)
    : TsdfVolume(Eigen::Vector3i::Constant(cfg.dims), cfg.voxel_size(), cfg.origin,
                 cfg.truncation_voxels * cfg.voxel_size(), cfg.w_max) {
  cfg.validate();
}

TsdfVolume::TsdfVolume(const Eigen::Vector3i& dims, double voxel_size, const Vec3& origin, double truncation,
                       float w_max)
    : dims_(dims), voxel_size_(voxel_size), origin_(origin), truncation_(truncation), w_max_(w_max) {
  if ((dims.array() < 1).any()) throw InvalidInput("volume dims must be positive");
  if (!(voxel_size > 0) || !(truncation > 0) || !(w_max > 0)) throw InvalidInput("invalid volume parameters");
  voxels_.assign(static_cast<std::size_t>(dims.x()) * dims.y() * dims.z(), Voxel{});
}

bool TsdfVolume::empty() const {
  return std::none_of(voxels_.begin(), voxels_.end(), [](const Voxel& v) { return v.wF > 0; });
}

void fuse_geometry(Voxel& v, float f, float w, float w_max) {
  if (!(w > 0)) return;
  const float total = v.wF + w;
  v.F = (v.wF * v.F + w * f) / total;
  v.wF = std::min(total, w_max);
}

void fuse_radiance(Voxel& v, const std::array<float, 3>& radiance, const std::array<float, 3>& nr, float w,
                   float w_max) {
  if (!(w > 0)) return;
  const float total = v.wR + w;
  for (int c = 0; c < 3; ++c) {
    v.R[c] = (v.wR * v.R[c] + w * radiance[c]) / total;
    v.nr[c] = (v.wR * v.nr[c] + w * nr[c]) / total;
  }
  v.wR = std::min(total, w_max);
}

}  // namespace hdrfusion
