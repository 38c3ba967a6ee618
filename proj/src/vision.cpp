#include "vinit/vision.hpp"

#include <cmath>

namespace vinit {

Vec2 reprojection_residual(const Feature& f, const Vec2& obs_pixel,
                           const KeyframeState& anchor,
                           const KeyframeState& target, const Pose& extrinsics,
                           const PinholeCamera& camera) {
  const Vec3 point_c =
      feature_point_in_camera(f, anchor.pose(), target.pose(), extrinsics);
  return camera.project(point_c) - obs_pixel;
}

ReprojectionJacobians reprojection_residual_jacobians(
    const Feature& f, const Vec2& obs_pixel, const KeyframeState& anchor,
    const KeyframeState& target, const Pose& extrinsics,
    const PinholeCamera& camera) {
  ReprojectionJacobians out;
  const FeaturePointJacobians chain = feature_point_in_camera_jacobians(
      f, anchor.pose(), target.pose(), extrinsics);
  if (chain.point_c.z() <= 1e-9) {
    return out;
  }
  const Eigen::Matrix<double, 2, 3> d_pix =
      camera.projection_jacobian(chain.point_c);
  out.valid = true;
  out.same_frame = chain.same_frame;
  out.residual = camera.project(chain.point_c) - obs_pixel;
  out.d_uvw = d_pix * chain.d_uvw;
  if (chain.same_frame) {
    out.d_anchor_theta.setZero();
    out.d_anchor_p.setZero();
    out.d_target_theta.setZero();
    out.d_target_p.setZero();
  } else {
    out.d_anchor_theta = d_pix * chain.d_anchor_theta;
    out.d_anchor_p = d_pix * chain.d_anchor_p;
    out.d_target_theta = d_pix * chain.d_target_theta;
    out.d_target_p = d_pix * chain.d_target_p;
  }
  return out;
}

double huber_rho(double squared_norm, double delta) {
  const double d2 = delta * delta;
  if (squared_norm <= d2) {
    return squared_norm;
  }
  return 2.0 * delta * std::sqrt(squared_norm) - d2;
}

double huber_weight(double squared_norm, double delta) {
  const double d2 = delta * delta;
  if (squared_norm <= d2) {
    return 1.0;
  }
  return delta / std::sqrt(squared_norm);
}

}  // namespace vinit
