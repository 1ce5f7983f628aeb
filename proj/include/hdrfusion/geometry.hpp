#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hdrfusion {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Pinhole intrinsics. Pixel centers sit at integer coordinates.
struct CameraModel {
  double fx = 0;
  double fy = 0;
  double cx = 0;
  double cy = 0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0 && fy > 0 && cx >= 0 && cx < width && cy >= 0 && cy < height;
  }

  /// Intrinsics of pyramid level `level` built by 2x2 box downsampling.
  CameraModel at_level(int level) const;

  bool operator==(const CameraModel&) const = default;
};

/// Rigid transform x' = R x + t.
///
/// Used both for relative motions (reference camera -> live camera, the
/// quantity the tracker estimates) and for absolute camera poses
/// (camera -> world, the trajectory convention).
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_quaternion(const Eigen::Quaterniond& q, const Vec3& t);

  /// Exponential map of a twist (tx, ty, tz, wx, wy, wz).
  static Pose exp(const Vec6& twist);
  /// Logarithm; inverse of exp() for rotations below pi.
  Vec6 log() const;

  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }
  Pose operator*(const Pose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }
  Pose inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -rt * translation};
  }

  Eigen::Quaterniond quaternion() const;

  /// Rotation angle in radians.
  double angle() const;

  /// True when R is orthonormal with det +1 within `tol`.
  bool is_valid(double tol = 1e-6) const;
  bool is_finite() const { return rotation.allFinite() && translation.allFinite(); }
};

/// Skew-symmetric cross-product matrix.
inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Pixel coordinates of a camera-frame point. Throws BehindCamera for z <= 0.
Vec2 project(const Vec3& point, const CameraModel& cam);

/// Camera-frame point at pixel `u` and depth `depth` (z, meters).
/// Throws InvalidDepth for depth <= 0.
Vec3 unproject(const Vec2& u, double depth, const CameraModel& cam);

}  // namespace hdrfusion
