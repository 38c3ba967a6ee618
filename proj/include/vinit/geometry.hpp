#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>

#include "vinit/errors.hpp"

namespace vinit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat15 = Eigen::Matrix<double, 15, 15>;

/// Skew-symmetric matrix such that skew(a) * b == a.cross(b).
Mat3 skew(const Vec3& v);

/// Right Jacobian of SO(3) and its inverse, with series fallback near zero.
Mat3 so3_right_jacobian(const Vec3& phi);
Mat3 so3_right_jacobian_inverse(const Vec3& phi);

/// Unit-norm Hamilton quaternion. Canonical form keeps w >= 0 so a rotation
/// has a single representative.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(1.0, 0.0, 0.0, 0.0) {}

  /// Normalizes and canonicalizes (w, x, y, z).
  UnitQuaternion(double w, double x, double y, double z);

  explicit UnitQuaternion(const Eigen::Quaterniond& q);

  static UnitQuaternion identity() { return UnitQuaternion(); }

  /// Exponential map: rotation by angle |omega| about omega / |omega|.
  /// Uses a series expansion below 1e-8 rad.
  static UnitQuaternion exp(const Vec3& omega);

  static UnitQuaternion from_matrix(const Mat3& rotation);

  /// Logarithm map; returns the rotation vector in [0, pi].
  Vec3 log() const;

  UnitQuaternion inverse() const { return UnitQuaternion(q_.conjugate()); }

  UnitQuaternion operator*(const UnitQuaternion& rhs) const {
    return UnitQuaternion(q_ * rhs.q_);
  }

  Vec3 rotate(const Vec3& v) const { return q_ * v; }

  Mat3 matrix() const { return q_.toRotationMatrix(); }

  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }

  const Eigen::Quaterniond& eigen() const { return q_; }

  double norm() const { return q_.norm(); }

  /// Right-multiplied retraction: this * exp(delta).
  UnitQuaternion retract(const Vec3& delta) const {
    return *this * UnitQuaternion::exp(delta);
  }

  /// Rotation angle to another quaternion, radians.
  double angular_distance(const UnitQuaternion& other) const {
    return (inverse() * other).log().norm();
  }

  bool operator==(const UnitQuaternion& rhs) const {
    return q_.coeffs() == rhs.q_.coeffs();
  }

 private:
  Eigen::Quaterniond q_;
};

/// Rigid transform; rotation maps the local frame into the parent frame and
/// translation is the local origin expressed in the parent frame.
struct Pose {
  UnitQuaternion rotation;
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const UnitQuaternion& q, const Vec3& t) : rotation(q), translation(t) {}

  static Pose identity() { return Pose(); }

  Vec3 apply(const Vec3& p) const {
    return rotation.rotate(p) + translation;
  }

  Pose operator*(const Pose& rhs) const {
    return Pose(rotation * rhs.rotation,
                rotation.rotate(rhs.translation) + translation);
  }

  Pose inverse() const {
    UnitQuaternion r_inv = rotation.inverse();
    return Pose(r_inv, -r_inv.rotate(translation));
  }

  Mat4 matrix() const;

  bool operator==(const Pose& rhs) const {
    return rotation == rhs.rotation && translation == rhs.translation;
  }
};

/// R * p + t.
inline Vec3 transform_point(const Pose& pose, const Vec3& point) {
  return pose.apply(point);
}

/// Undistorted pinhole intrinsics.
struct PinholeCamera {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Projects a camera-frame point; throws NonPositiveDepth for z <= 1e-9.
  Vec2 project(const Vec3& point_c) const;

  /// d(pixel)/d(point_c), 2x3, at a point with positive depth.
  Eigen::Matrix<double, 2, 3> projection_jacobian(const Vec3& point_c) const;

  /// Camera-frame point at the given depth along the pixel ray.
  Vec3 unproject(const Vec2& pixel, double depth) const;

  /// Pixel to normalized image-plane coordinates.
  Vec2 normalize(const Vec2& pixel) const {
    return Vec2((pixel.x() - cx) / fx, (pixel.y() - cy) / fy);
  }

  bool in_bounds(const Vec2& pixel, double margin = 0.0) const {
    return pixel.x() >= margin && pixel.x() <= width - 1 - margin &&
           pixel.y() >= margin && pixel.y() <= height - 1 - margin;
  }
};

/// quat_exp alias used throughout integration code.
inline UnitQuaternion quat_exp(const Vec3& omega) {
  return UnitQuaternion::exp(omega);
}

}  // namespace vinit
