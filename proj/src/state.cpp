#include "vinit/state.hpp"

#include <cmath>

namespace vinit {

double ScaleShift::scale() const { return scale_from_free(s); }

double scale_from_free(double s) {
  const double softplus = s > 0.0 ? s + std::log1p(std::exp(-s))
                                  : std::log1p(std::exp(s));
  return kScaleEpsilon + softplus;
}

double free_from_scale(double a) {
  const double y = a - kScaleEpsilon;
  if (y <= 0.0) {
    throw Error("free_from_scale requires a > epsilon");
  }
  if (y > 30.0) {
    return y + std::log1p(-std::exp(-y));
  }
  return std::log(std::expm1(y));
}

double scale_from_free_derivative(double s) {
  if (s >= 0.0) {
    return 1.0 / (1.0 + std::exp(-s));
  }
  const double e = std::exp(s);
  return e / (1.0 + e);
}

Vec3 feature_point_in_camera(const Feature& f, const Pose& anchor_pose,
                             const Pose& target_pose, const Pose& extrinsics) {
  if (f.w <= 1e-9) {
    throw NonPositiveInverseDepth("feature inverse depth must be positive");
  }
  const Vec3 point_anchor_cam(f.u / f.w, f.v / f.w, 1.0 / f.w);
  if (anchor_pose == target_pose) {
    return point_anchor_cam;
  }
  const Pose anchor_cam_to_global = anchor_pose * extrinsics;
  const Pose target_cam_to_global = target_pose * extrinsics;
  return target_cam_to_global.inverse().apply(
      anchor_cam_to_global.apply(point_anchor_cam));
}

FeaturePointJacobians feature_point_in_camera_jacobians(
    const Feature& f, const Pose& anchor_pose, const Pose& target_pose,
    const Pose& extrinsics) {
  if (f.w <= 1e-9) {
    throw NonPositiveInverseDepth("feature inverse depth must be positive");
  }
  FeaturePointJacobians out;
  const double inv_w = 1.0 / f.w;
  const Vec3 m(f.u, f.v, 1.0);
  const Vec3 point_anchor_cam = m * inv_w;

  Mat3 d_cj_uvw;  // columns d/du, d/dv, d/dw
  d_cj_uvw.col(0) = Vec3(inv_w, 0.0, 0.0);
  d_cj_uvw.col(1) = Vec3(0.0, inv_w, 0.0);
  d_cj_uvw.col(2) = -m * inv_w * inv_w;

  if (anchor_pose == target_pose) {
    out.point_c = point_anchor_cam;
    out.d_uvw = d_cj_uvw;
    out.same_frame = true;
    return out;
  }

  const Mat3 r_e = extrinsics.rotation.matrix();
  const Mat3 r_j = anchor_pose.rotation.matrix();
  const Mat3 r_k_t = target_pose.rotation.matrix().transpose();

  const Vec3 point_anchor_imu = r_e * point_anchor_cam + extrinsics.translation;
  const Vec3 point_global =
      r_j * point_anchor_imu + anchor_pose.translation;
  const Vec3 point_target_imu = r_k_t * (point_global - target_pose.translation);
  const Vec3 point_target_cam =
      r_e.transpose() * (point_target_imu - extrinsics.translation);

  const Mat3 a = r_e.transpose() * r_k_t;  // global displacement -> target cam

  out.point_c = point_target_cam;
  out.d_target_theta = r_e.transpose() * skew(point_target_imu);
  out.d_target_p = -a;
  out.d_anchor_theta = -a * r_j * skew(point_anchor_imu);
  out.d_anchor_p = a;
  out.d_uvw = a * r_j * r_e * d_cj_uvw;
  return out;
}

}  // namespace vinit
