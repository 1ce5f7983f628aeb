#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/parallel.hpp"
#include "hdrfusion/synth.hpp"

namespace hdrfusion {

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CameraModel qvga_camera() { return {262.5, 262.5, 159.5, 119.5, 320, 240}; }

namespace {

double lattice(std::int64_t i, std::int64_t j, int surface, int octave) {
  const std::uint64_t key = static_cast<std::uint64_t>(i) * 0x8da6b343ULL ^
                            static_cast<std::uint64_t>(j) * 0xd8163841ULL ^
                            static_cast<std::uint64_t>(surface * 4 + octave) * 0xcb1ab31fULL;
  return static_cast<double>(split_seed(key, 0) >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3 - 2 * t); }

double value_noise(double u, double v, int surface, int octave) {
  const double fu = std::floor(u), fv = std::floor(v);
  const auto i = static_cast<std::int64_t>(fu), j = static_cast<std::int64_t>(fv);
  const double su = smoothstep(u - fu), sv = smoothstep(v - fv);
  const double a = lattice(i, j, surface, octave), b = lattice(i + 1, j, surface, octave);
  const double c = lattice(i, j + 1, surface, octave), d = lattice(i + 1, j + 1, surface, octave);
  return (1 - sv) * ((1 - su) * a + su * b) + sv * ((1 - su) * c + su * d);
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  int surface = -1;
  int axis = 0;
  Vec3 tint{1, 1, 1};
};

Hit intersect(const Scene& s, const Vec3& o, const Vec3& d) {
  constexpr double kEps = 1e-9;
  Hit hit;
  for (std::size_t k = 0; k < s.planes.size(); ++k) {
    const AxisPlane& p = s.planes[k];
    if (std::abs(d[p.axis]) < 1e-12) continue;
    const double t = (p.position - o[p.axis]) / d[p.axis];
    if (t > kEps && t < hit.t) hit = {t, static_cast<int>(k), p.axis, p.tint};
  }
  for (std::size_t k = 0; k < s.boxes.size(); ++k) {
    const AxisBox& b = s.boxes[k];
    double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
    int axis = 0;
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (std::abs(d[a]) < 1e-12) {
        miss = o[a] < b.lo[a] || o[a] > b.hi[a];
        continue;
      }
      double ta = (b.lo[a] - o[a]) / d[a], tb = (b.hi[a] - o[a]) / d[a];
      if (ta > tb) std::swap(ta, tb);
      if (ta > t0) {
        t0 = ta;
        axis = a;
      }
      t1 = std::min(t1, tb);
    }
    if (!miss && t0 <= t1 && t0 > kEps && t0 < hit.t) hit = {t0, 100 + static_cast<int>(k), axis, b.tint};
  }
  return hit;
}

}  // namespace

double Scene::illumination(const Vec3& p) const {
  double l = ambient * std::exp(ambient_slope * p.x());
  for (const SpotLight& s : spots) l += s.peak * std::exp(-(p - s.center).squaredNorm() / (2 * s.sigma * s.sigma));
  return l;
}

Vec3 Scene::shade(const Vec3& p, int surface, int axis, const Vec3& tint) const {
  const double u = p[(axis + 1) % 3], v = p[(axis + 2) % 3];
  const double n = 0.3 * value_noise(u / texture_cell, v / texture_cell, surface, 0) +
                   0.3 * value_noise(u / detail_cell, v / detail_cell, surface, 1) +
                   0.4 * value_noise(u / fine_cell, v / fine_cell, surface, 2);
  // Summed octaves cluster around 0.5; stretch for local contrast.
  const double albedo = 0.1 + 0.9 * std::clamp(0.5 + texture_contrast * (n - 0.5), 0.0, 1.0);
  return albedo * illumination(p) * tint;
}

bool Scene::contains(const Vec3& p) const {
  return (p.array() > bounds_lo.array()).all() && (p.array() < bounds_hi.array()).all();
}

Scene Scene::room() {
  Scene s;
  s.planes = {
      {2, 2.5, {0.95, 0.9, 0.85}},   // back wall
      {2, -1.0, {0.9, 0.9, 0.9}},    // wall behind the camera
      {0, -1.3, {0.8, 0.9, 1.0}},    // left wall
      {0, 1.3, {1.0, 0.85, 0.8}},    // right wall
      {1, 0.8, {0.9, 0.8, 0.7}},     // floor
      {1, -1.0, {1.0, 1.0, 1.0}},    // ceiling
  };
  s.boxes = {
      {{-0.75, 0.35, 1.5}, {-0.25, 0.8, 1.95}, {0.7, 0.85, 1.0}},
      {{0.3, 0.1, 1.7}, {0.75, 0.8, 2.1}, {1.0, 0.95, 0.7}},
  };
  s.spots = {
      {{0.6, -0.3, 2.5}, 4.0e5, 0.35},
      {{-0.9, 0.2, 2.5}, 1.2e5, 0.35},
      {{1.3, 0.0, 1.2}, 3.0e5, 0.35},
  };
  s.ambient = 1.5e4;
  s.ambient_slope = std::log(30.0) / 2.6;
  s.bounds_lo = Vec3(-1.3, -1.0, -1.0);
  s.bounds_hi = Vec3(1.3, 0.8, 2.5);
  return s;
}

Scene Scene::plane(double depth, double level) {
  Scene s;
  s.planes = {{2, depth, {1, 1, 1}}};
  s.ambient = level;
  s.bounds_hi = Vec3(1e9, 1e9, depth);
  return s;
}

HdrSourceFrame Scene::render_view(const Pose& camera_to_world, const CameraModel& cam, int supersample) const {
  if (!cam.valid()) throw InvalidInput("invalid camera intrinsics");
  if (supersample < 1) throw InvalidInput("supersample must be >= 1");
  const Vec3 o = camera_to_world.translation;
  if (!contains(o)) throw InvalidInput("camera pose lies outside the scene bounds");
  const Mat3& rot = camera_to_world.rotation;
  HdrSourceFrame f;
  f.pose = camera_to_world;
  f.hdr = ImageF(cam.width, cam.height, 3, 0.0f);
  f.depth = ImageF(cam.width, cam.height, 1, 0.0f);
  const double inv_n = 1.0 / (supersample * supersample);

  parallel_for(0, cam.height, [&](int y) {
    for (int x = 0; x < cam.width; ++x) {
      // Unnormalized rays with camera-frame z = 1, so the hit parameter is depth.
      const Hit center = intersect(*this, o, rot * Vec3((x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0));
      if (std::isfinite(center.t)) f.depth(x, y) = static_cast<float>(center.t);
      Vec3 acc = Vec3::Zero();
      for (int sy = 0; sy < supersample; ++sy)
        for (int sx = 0; sx < supersample; ++sx) {
          const double px = x + (sx + 0.5) / supersample - 0.5;
          const double py = y + (sy + 0.5) / supersample - 0.5;
          const Vec3 d = rot * Vec3((px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, 1.0);
          const Hit h = intersect(*this, o, d);
          if (std::isfinite(h.t)) acc += shade(o + h.t * d, h.surface, h.axis, h.tint);
        }
      for (int c = 0; c < 3; ++c) f.hdr(x, y, c) = static_cast<float>(acc[c] * inv_n);
    }
  });
  return f;
}

std::vector<Pose> default_trajectory(int frames) {
  if (frames < 1) throw InvalidInput("trajectory needs at least one frame");
  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(frames));
  constexpr double kDeg = std::numbers::pi / 180.0;
  for (int i = 0; i < frames; ++i) {
    const double t = frames > 1 ? static_cast<double>(i) / (frames - 1) : 0.0;
    const double yaw = (-10.0 + 20.0 * t) * kDeg;
    const double pitch = 3.0 * std::sin(2 * std::numbers::pi * t) * kDeg;
    Pose p;
    p.rotation = (Eigen::AngleAxisd(yaw, Vec3::UnitY()) * Eigen::AngleAxisd(pitch, Vec3::UnitX())).toRotationMatrix();
    p.translation = Vec3(-0.25 + 0.5 * t, 0.02 * std::sin(2 * std::numbers::pi * t), 0.15 * std::sin(std::numbers::pi * t));
    out.push_back(p);
  }
  return out;
}

}  // namespace hdrfusion
