#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/mapper.hpp"

namespace hdrfusion {

static_assert(std::endian::native == std::endian::little, "volume snapshots assume a little-endian host");

PointCloud extract_pointcloud(const SurfacePrediction& pred, const CameraModel& cam) {
  PointCloud cloud;
  const Pose& pose = pred.pose;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred.valid(x, y)) continue;
      const double d = pred.depth(x, y);
      const Vec3 pc((x - cam.cx) * d / cam.fx, (y - cam.cy) * d / cam.fy, d);
      const Vec3 nc(pred.normals(x, y, 0), pred.normals(x, y, 1), pred.normals(x, y, 2));
      cloud.points.push_back(pose * pc);
      cloud.normals.push_back(pose.rotation * nc);
      cloud.radiance.push_back({pred.radiance(x, y, 0), pred.radiance(x, y, 1), pred.radiance(x, y, 2)});
    }
  if (cloud.points.empty()) throw InvalidInput("prediction has no valid pixels");
  return cloud;
}

PointCloud extract_pointcloud(const TsdfVolume& volume) {
  PointCloud cloud;
  const Eigen::Vector3i dims = volume.dims();
  const double vs = volume.voxel_size();
  auto f_at = [&](int x, int y, int z) { return volume.at(x, y, z).F; };
  for (int z = 1; z < dims.z() - 1; ++z)
    for (int y = 1; y < dims.y() - 1; ++y)
      for (int x = 1; x < dims.x() - 1; ++x) {
        const Voxel& v = volume.at(x, y, z);
        if (!(v.wF > 0)) continue;
        const int nb[3][3] = {{x + 1, y, z}, {x, y + 1, z}, {x, y, z + 1}};
        for (int a = 0; a < 3; ++a) {
          const Voxel& n = volume.at(nb[a][0], nb[a][1], nb[a][2]);
          if (!(n.wF > 0) || (v.F > 0) == (n.F > 0) || v.F == n.F) continue;
          const double t = v.F / (v.F - n.F);
          Vec3 p = volume.voxel_center(x, y, z);
          p[a] += t * vs;
          const Vec3 grad(f_at(x + 1, y, z) - f_at(x - 1, y, z), f_at(x, y + 1, z) - f_at(x, y - 1, z),
                          f_at(x, y, z + 1) - f_at(x, y, z - 1));
          cloud.points.push_back(p);
          cloud.normals.push_back(grad.norm() > 0 ? Vec3(grad.normalized()) : Vec3::Zero());
          const Voxel& src = v.wR >= n.wR ? v : n;
          cloud.radiance.push_back(src.R);
        }
      }
  if (cloud.points.empty()) throw InvalidInput("volume has no surface");
  return cloud;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  if (cloud.points.empty()) throw InvalidInput("point cloud is empty");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f,
               "ply\nformat ascii 1.0\nelement vertex %zu\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property float nx\nproperty float ny\nproperty float nz\n"
               "property float radiance_r\nproperty float radiance_g\nproperty float radiance_b\n"
               "end_header\n",
               cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const Vec3& n = cloud.normals[i];
    const auto& r = cloud.radiance[i];
    std::fprintf(f, "%.6f %.6f %.6f %.6f %.6f %.6f %.6g %.6g %.6g\n", p.x(), p.y(), p.z(), n.x(), n.y(), n.z(),
                 r[0], r[1], r[2]);
  }
  if (std::fclose(f) != 0) throw IoError("failed to write " + path.string());
}

void write_volume(const std::filesystem::path& path, const TsdfVolume& volume) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::int32_t dims[3] = {volume.dims().x(), volume.dims().y(), volume.dims().z()};
  const float header[5] = {static_cast<float>(volume.voxel_size()), static_cast<float>(volume.origin().x()),
                           static_cast<float>(volume.origin().y()), static_cast<float>(volume.origin().z()),
                           static_cast<float>(volume.truncation())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(volume.voxels().data()),
            static_cast<std::streamsize>(volume.voxels().size() * sizeof(Voxel)));
  if (!out) throw IoError("failed to write " + path.string());
}

TsdfVolume read_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::int32_t dims[3];
  float header[5];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw IoError(path.string() + ": truncated volume header");
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1 || dims[0] > 4096 || dims[1] > 4096 || dims[2] > 4096)
    throw IoError(path.string() + ": implausible volume dims");
  TsdfVolume vol(Eigen::Vector3i(dims[0], dims[1], dims[2]), header[0], Vec3(header[1], header[2], header[3]),
                 header[4], VolumeConfig{}.w_max);
  in.read(reinterpret_cast<char*>(vol.voxels().data()),
          static_cast<std::streamsize>(vol.voxels().size() * sizeof(Voxel)));
  if (!in) throw IoError(path.string() + ": truncated voxel data");
  return vol;
}

}  // namespace hdrfusion
