#include <algorithm>
#include <cmath>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/mapper.hpp"
#include "hdrfusion/parallel.hpp"

namespace hdrfusion {

FusionFrame make_fusion_frame(const RadianceFrame& rad, const ImageF& depth, double exposure_scale,
                              int patch_radius) {
  if (!(exposure_scale > 0) || !std::isfinite(exposure_scale)) throw InvalidInput("exposure scale must be positive");
  if (!depth.same_shape(rad.radiance)) throw InvalidInput("depth and radiance resolution differ");
  FusionFrame f;
  f.depth = depth;
  f.radiance = rad.radiance;
  for (float& v : f.radiance.data()) v = static_cast<float>(v * exposure_scale);
  const NormalizedRadianceFrame n = normalize_radiance(rad, patch_radius, &depth);
  f.nr = n.nr;
  f.nr_valid = n.valid;
  f.confidence = rad.confidence;
  f.channel_confidence = rad.channel_confidence;
  f.saturated = rad.saturated;
  return f;
}

ImageF depth_normals(const ImageF& depth, const CameraModel& cam) {
  const int w = depth.width(), h = depth.height();
  // 5x5 mean over valid samples suppresses axial noise before differencing.
  constexpr int kSmooth = 2;
  constexpr int kStride = 2;
  constexpr float kMaxJump = 0.1f;
  ImageF smooth(w, h, 1, 0.0f);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const float d0 = depth(x, y);
      if (!(d0 > 0)) continue;
      double s = 0;
      int n = 0;
      for (int dy = -kSmooth; dy <= kSmooth; ++dy)
        for (int dx = -kSmooth; dx <= kSmooth; ++dx) {
          if (!depth.contains(x + dx, y + dy)) continue;
          const float d = depth(x + dx, y + dy);
          if (d > 0 && std::abs(d - d0) < kMaxJump) {
            s += d;
            ++n;
          }
        }
      smooth(x, y) = static_cast<float>(s / n);
    }
  });

  ImageF normals(w, h, 3, 0.0f);
  auto point = [&](int x, int y) {
    const double d = smooth(x, y);
    return Vec3((x - cam.cx) * d / cam.fx, (y - cam.cy) * d / cam.fy, d);
  };
  // Central difference when both neighbors are on the same surface,
  // otherwise one-sided toward the consistent neighbor (borders, depth edges).
  auto tangent = [&](int x, int y, int dx, int dy, Vec3& t) {
    const float c = smooth(x, y);
    auto usable = [&](int xx, int yy) {
      if (!smooth.contains(xx, yy)) return false;
      const float d = smooth(xx, yy);
      return d > 0 && std::abs(d - c) < kMaxJump;
    };
    const bool fwd = usable(x + dx, y + dy), bwd = usable(x - dx, y - dy);
    if (fwd && bwd)
      t = point(x + dx, y + dy) - point(x - dx, y - dy);
    else if (fwd)
      t = point(x + dx, y + dy) - point(x, y);
    else if (bwd)
      t = point(x, y) - point(x - dx, y - dy);
    else
      return false;
    return true;
  };
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (!(smooth(x, y) > 0)) continue;
      Vec3 tx, ty;
      if (!tangent(x, y, kStride, 0, tx) || !tangent(x, y, 0, kStride, ty)) continue;
      Vec3 n = tx.cross(ty);
      const double len = n.norm();
      if (!(len > 0)) continue;
      n /= len;
      if (n.dot(point(x, y)) > 0) n = -n;
      for (int k = 0; k < 3; ++k) normals(x, y, k) = static_cast<float>(n[k]);
    }
  });
  return normals;
}

void integrate(TsdfVolume& volume, const FusionFrame& frame, const CameraModel& cam,
               const Pose& camera_to_world, const FusionParams& params) {
  if (!camera_to_world.is_valid(1e-5)) throw InvalidInput("integration pose is not a rigid transform");
  const ImageF& depth = frame.depth;
  if (depth.width() != cam.width || depth.height() != cam.height)
    throw InvalidInput("fusion frame and camera resolution differ");
  const ImageF normals = depth_normals(depth, cam);
  const Pose world_to_camera = camera_to_world.inverse();
  const Mat3 rot = world_to_camera.rotation;
  const Vec3 trans = world_to_camera.translation;
  const Eigen::Vector3i dims = volume.dims();
  const double delta = volume.truncation();
  const float w_max = volume.w_max();

  parallel_for(0, dims.z(), [&](int z) {
    for (int y = 0; y < dims.y(); ++y)
      for (int x = 0; x < dims.x(); ++x) {
        const Vec3 p = rot * volume.voxel_center(x, y, z) + trans;
        if (!(p.z() > 0)) continue;
        const int u = static_cast<int>(std::lround(cam.fx * p.x() / p.z() + cam.cx));
        const int v = static_cast<int>(std::lround(cam.fy * p.y() / p.z() + cam.cy));
        if (u < 0 || v < 0 || u >= cam.width || v >= cam.height) continue;
        const double d = depth(u, v);
        if (!(d > 0)) continue;
        const double range = p.norm();
        const double sdf = (d - p.z()) * range / p.z();
        if (sdf < -delta) continue;
        const Vec3 n(normals(u, v, 0), normals(u, v, 1), normals(u, v, 2));
        if (n.squaredNorm() < 0.5) continue;
        const double cos_view = std::abs(n.dot(p) / range);
        Voxel& vox = volume.at(x, y, z);
        fuse_geometry(vox, static_cast<float>(std::min(1.0, sdf / delta)), static_cast<float>(cos_view), w_max);

        if (std::abs(sdf) >= delta || frame.saturated(u, v) || !frame.nr_valid(u, v)) continue;
        const float pmax = std::max({frame.channel_confidence(u, v, 0), frame.channel_confidence(u, v, 1),
                                     frame.channel_confidence(u, v, 2)});
        if (!(pmax > params.tau0) || !(cos_view > params.tau1)) continue;
        const std::array<float, 3> rad{frame.radiance(u, v, 0), frame.radiance(u, v, 1), frame.radiance(u, v, 2)};
        const std::array<float, 3> nr{frame.nr(u, v, 0), frame.nr(u, v, 1), frame.nr(u, v, 2)};
        fuse_radiance(vox, rad, nr, frame.confidence(u, v), w_max);
      }
  });
}

}  // namespace hdrfusion
