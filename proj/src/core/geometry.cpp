#include "hdrfusion/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "hdrfusion/errors.hpp"

namespace hdrfusion {

CameraModel CameraModel::at_level(int level) const {
  if (level == 0) return *this;
  const double s = 1.0 / static_cast<double>(1 << level);
  CameraModel c;
  c.fx = fx * s;
  c.fy = fy * s;
  // A 2x2 box average puts the new pixel center between the old ones.
  c.cx = (cx + 0.5) * s - 0.5;
  c.cy = (cy + 0.5) * s - 0.5;
  c.width = width >> level;
  c.height = height >> level;
  return c;
}

Pose Pose::from_quaternion(const Eigen::Quaterniond& q, const Vec3& t) {
  return {q.normalized().toRotationMatrix(), t};
}

Pose Pose::exp(const Vec6& twist) {
  const Vec3 v = twist.head<3>();
  const Vec3 w = twist.tail<3>();
  const double theta = w.norm();
  const Mat3 W = skew(w);
  Mat3 R;
  Mat3 V;
  if (theta < 1e-10) {
    R = Mat3::Identity() + W + 0.5 * W * W;
    V = Mat3::Identity() + 0.5 * W + W * W / 6.0;
  } else {
    const double a = std::sin(theta) / theta;
    const double b = (1 - std::cos(theta)) / (theta * theta);
    const double c = (theta - std::sin(theta)) / (theta * theta * theta);
    R = Mat3::Identity() + a * W + b * W * W;
    V = Mat3::Identity() + b * W + c * W * W;
  }
  Pose p;
  // Re-orthonormalize so repeated composition does not drift.
  p.rotation = Eigen::Quaterniond(R).normalized().toRotationMatrix();
  p.translation = V * v;
  return p;
}

Vec6 Pose::log() const {
  const Eigen::AngleAxisd aa(rotation);
  const double theta = aa.angle();
  const Vec3 w = aa.axis() * theta;
  const Mat3 W = skew(w);
  Mat3 V_inv;
  if (theta < 1e-10) {
    V_inv = Mat3::Identity() - 0.5 * W + W * W / 12.0;
  } else {
    const double half = 0.5 * theta;
    const double k = (1 - half * std::cos(half) / std::sin(half)) / (theta * theta);
    V_inv = Mat3::Identity() - 0.5 * W + k * W * W;
  }
  Vec6 out;
  out.head<3>() = V_inv * translation;
  out.tail<3>() = w;
  return out;
}

Eigen::Quaterniond Pose::quaternion() const { return Eigen::Quaterniond(rotation).normalized(); }

double Pose::angle() const {
  const double c = std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

bool Pose::is_valid(double tol) const {
  if (!is_finite()) return false;
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Vec2 project(const Vec3& point, const CameraModel& cam) {
  if (!(point.z() > 0)) throw BehindCamera();
  return {cam.fx * point.x() / point.z() + cam.cx, cam.fy * point.y() / point.z() + cam.cy};
}

Vec3 unproject(const Vec2& u, double depth, const CameraModel& cam) {
  if (!(depth > 0)) throw InvalidDepth();
  return {(u.x() - cam.cx) / cam.fx * depth, (u.y() - cam.cy) / cam.fy * depth, depth};
}

}  // namespace hdrfusion
