#include <algorithm>
#include <cmath>
#include <limits>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/mapper.hpp"
#include "hdrfusion/parallel.hpp"

namespace hdrfusion {
namespace {

constexpr double kNear = 0.1;
constexpr double kMinGeometrySupport = 0.5;
// Minimum summed trilinear weight of radiance-bearing corners.
constexpr double kMinRadianceSupport = 0.25;

struct Cell {
  int i, j, k;
  double fx, fy, fz;
};

bool locate(const TsdfVolume& vol, const Vec3& p, Cell& c) {
  const Vec3 g = (p - vol.origin()) / vol.voxel_size();
  const double fi = std::floor(g.x()), fj = std::floor(g.y()), fk = std::floor(g.z());
  if (fi < 0 || fj < 0 || fk < 0 || fi + 1 > vol.dims().x() - 1 || fj + 1 > vol.dims().y() - 1 ||
      fk + 1 > vol.dims().z() - 1)
    return false;
  c = {static_cast<int>(fi), static_cast<int>(fj), static_cast<int>(fk), g.x() - fi, g.y() - fj, g.z() - fk};
  return true;
}

template <typename Fn>
void for_corners(const Cell& c, Fn&& fn) {
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? c.fx : 1 - c.fx) * (dy ? c.fy : 1 - c.fy) * (dz ? c.fz : 1 - c.fz);
        fn(c.i + dx, c.j + dy, c.k + dz, w);
      }
}

// Trilinear F over the observed corners, renormalized; false when they
// carry less than kMinGeometrySupport of the weight.
bool sample_f(const TsdfVolume& vol, const Vec3& p, double& f) {
  Cell c;
  if (!locate(vol, p, c)) return false;
  double acc = 0, support = 0;
  for_corners(c, [&](int x, int y, int z, double w) {
    const Voxel& v = vol.at(x, y, z);
    if (!(v.wF > 0)) return;
    acc += w * v.F;
    support += w;
  });
  if (support < kMinGeometrySupport) return false;
  f = acc / support;
  return true;
}

// Clips the ray o + t d against the volume's sample box.
bool clip_ray(const TsdfVolume& vol, const Vec3& o, const Vec3& d, double& t0, double& t1) {
  const Vec3 lo = vol.origin();
  const Vec3 hi = vol.origin() + vol.voxel_size() * (vol.dims().cast<double>() - Vec3::Ones());
  t0 = kNear;
  t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-12) {
      if (o[a] < lo[a] || o[a] > hi[a]) return false;
      continue;
    }
    double ta = (lo[a] - o[a]) / d[a], tb = (hi[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 < t1;
}

}  // namespace

SurfacePrediction raycast(const TsdfVolume& volume, const Pose& camera_to_world, const CameraModel& cam) {
  if (!cam.valid()) throw InvalidInput("invalid camera intrinsics");
  if (volume.size() == 0) throw InvalidInput("raycast on an unallocated volume");
  const int w = cam.width, h = cam.height;
  SurfacePrediction pred;
  pred.pose = camera_to_world;
  pred.depth = ImageF(w, h, 1, 0.0f);
  pred.normals = ImageF(w, h, 3, 0.0f);
  pred.radiance = ImageF(w, h, 3, 0.0f);
  pred.nr = ImageF(w, h, 3, 0.0f);
  pred.confidence = ImageF(w, h, 1, 0.0f);
  pred.weight = ImageF(w, h, 1, 0.0f);
  pred.valid = Mask(w, h, 1, 0);
  pred.radiance_valid = Mask(w, h, 1, 0);

  const Mat3& rot = camera_to_world.rotation;
  const Vec3& origin = camera_to_world.translation;
  const double step = 0.5 * volume.truncation();
  const double vs = volume.voxel_size();

  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 dir_cam = Vec3((x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0).normalized();
      const Vec3 dir = rot * dir_cam;
      double t0, t1;
      if (!clip_ray(volume, origin, dir, t0, t1)) continue;

      double t_prev = 0, f_prev = 0;
      bool have_prev = false;
      double t_hit = -1;
      for (double t = t0; t <= t1; t += step) {
        double f;
        if (!sample_f(volume, origin + t * dir, f)) {
          have_prev = false;
          continue;
        }
        if (f < 0) {
          if (!have_prev || f_prev <= 0) break;
          double lo = t_prev, hi = t, flo = f_prev, fhi = f;
          double ts = lo + (hi - lo) * flo / (flo - fhi);
          double fs;
          if (sample_f(volume, origin + ts * dir, fs)) {
            if (fs > 0) {
              lo = ts;
              flo = fs;
            } else {
              hi = ts;
              fhi = fs;
            }
            if (flo - fhi > 0) ts = lo + (hi - lo) * flo / (flo - fhi);
          }
          t_hit = ts;
          break;
        }
        t_prev = t;
        f_prev = f;
        have_prev = true;
      }
      if (t_hit <= 0) continue;

      const Vec3 p = origin + t_hit * dir;
      // Central differences; one-sided against the crossing (F = 0) where a
      // neighbor is unobserved, as behind concave corners.
      Vec3 grad;
      bool ok = true;
      for (int a = 0; a < 3 && ok; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = vs;
        double fp = 0, fm = 0;
        const bool hp = sample_f(volume, p + e, fp), hm = sample_f(volume, p - e, fm);
        ok = hp || hm;
        grad[a] = hp && hm ? fp - fm : hp ? 2 * fp : -2 * fm;
      }
      if (!ok || !(grad.norm() > 0)) continue;
      Vec3 n = rot.transpose() * grad.normalized();
      const Vec3 pc = t_hit * dir_cam;
      if (n.dot(pc) > 0) n = -n;

      pred.depth(x, y) = static_cast<float>(pc.z());
      for (int k = 0; k < 3; ++k) pred.normals(x, y, k) = static_cast<float>(n[k]);
      pred.valid(x, y) = 1;

      Cell c;
      if (!locate(volume, p, c)) continue;
      double support = 0, wr = 0, wf = 0;
      Vec3 rad = Vec3::Zero(), nr = Vec3::Zero();
      for_corners(c, [&](int i, int j, int k, double wt) {
        const Voxel& v = volume.at(i, j, k);
        wf += wt * v.wF;
        wr += wt * v.wR;
        if (!(v.wR > 0)) return;
        support += wt;
        for (int ch = 0; ch < 3; ++ch) {
          rad[ch] += wt * v.R[ch];
          nr[ch] += wt * v.nr[ch];
        }
      });
      pred.weight(x, y) = static_cast<float>(wf);
      if (support < kMinRadianceSupport) continue;
      for (int ch = 0; ch < 3; ++ch) {
        pred.radiance(x, y, ch) = static_cast<float>(rad[ch] / support);
        pred.nr(x, y, ch) = static_cast<float>(nr[ch] / support);
      }
      pred.confidence(x, y) = static_cast<float>(wr);
      pred.radiance_valid(x, y) = 1;
    }
  });
  return pred;
}

}  // namespace hdrfusion
