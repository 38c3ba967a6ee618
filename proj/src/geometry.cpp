#include "vinit/geometry.hpp"

#include <cmath>

namespace vinit {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Mat3 so3_right_jacobian(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 hat = skew(phi);
  if (theta2 < 1e-16) {
    return Mat3::Identity() - 0.5 * hat + (1.0 / 6.0) * hat * hat;
  }
  const double theta = std::sqrt(theta2);
  const double a = (1.0 - std::cos(theta)) / theta2;
  const double b = (theta - std::sin(theta)) / (theta2 * theta);
  return Mat3::Identity() - a * hat + b * hat * hat;
}

Mat3 so3_right_jacobian_inverse(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 hat = skew(phi);
  if (theta2 < 1e-16) {
    return Mat3::Identity() + 0.5 * hat + (1.0 / 12.0) * hat * hat;
  }
  const double theta = std::sqrt(theta2);
  const double c =
      1.0 / theta2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * hat + c * hat * hat;
}

namespace {

Eigen::Quaterniond canonicalized(Eigen::Quaterniond q) {
  q.normalize();
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  return q;
}

}  // namespace

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z)
    : q_(canonicalized(Eigen::Quaterniond(w, x, y, z))) {}

UnitQuaternion::UnitQuaternion(const Eigen::Quaterniond& q)
    : q_(canonicalized(q)) {}

UnitQuaternion UnitQuaternion::exp(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  double half_sinc;  // sin(theta/2) / theta
  double w;
  if (theta2 < 1e-16) {
    half_sinc = 0.5 - theta2 / 48.0;
    w = 1.0 - theta2 / 8.0;
  } else {
    const double theta = std::sqrt(theta2);
    half_sinc = std::sin(0.5 * theta) / theta;
    w = std::cos(0.5 * theta);
  }
  return UnitQuaternion(Eigen::Quaterniond(
      w, half_sinc * omega.x(), half_sinc * omega.y(), half_sinc * omega.z()));
}

UnitQuaternion UnitQuaternion::from_matrix(const Mat3& rotation) {
  return UnitQuaternion(Eigen::Quaterniond(rotation));
}

Vec3 UnitQuaternion::log() const {
  const Vec3 v(q_.x(), q_.y(), q_.z());
  const double s = v.norm();
  const double w = q_.w();
  if (s < 1e-9) {
    // theta/sin(theta/2) ~ 2/w * (1 - s^2 / (3 w^2))
    return (2.0 / w) * (1.0 - s * s / (3.0 * w * w)) * v;
  }
  const double theta = 2.0 * std::atan2(s, w);
  return (theta / s) * v;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Vec2 PinholeCamera::project(const Vec3& point_c) const {
  if (point_c.z() <= 1e-9) {
    throw NonPositiveDepth("projection requires positive depth");
  }
  const double inv_z = 1.0 / point_c.z();
  return Vec2(fx * point_c.x() * inv_z + cx, fy * point_c.y() * inv_z + cy);
}

Eigen::Matrix<double, 2, 3> PinholeCamera::projection_jacobian(
    const Vec3& point_c) const {
  const double inv_z = 1.0 / point_c.z();
  const double inv_z2 = inv_z * inv_z;
  Eigen::Matrix<double, 2, 3> j;
  j << fx * inv_z, 0.0, -fx * point_c.x() * inv_z2,
       0.0, fy * inv_z, -fy * point_c.y() * inv_z2;
  return j;
}

Vec3 PinholeCamera::unproject(const Vec2& pixel, double depth) const {
  const Vec2 n = normalize(pixel);
  return Vec3(n.x() * depth, n.y() * depth, depth);
}

}  // namespace vinit
