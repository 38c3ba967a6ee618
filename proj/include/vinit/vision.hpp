#pragma once

#include "vinit/geometry.hpp"
#include "vinit/state.hpp"

namespace vinit {

/// Projection of the feature into the target keyframe minus the pixel
/// measurement. Throws NonPositiveDepth when the point falls behind the
/// target camera.
Vec2 reprojection_residual(const Feature& f, const Vec2& obs_pixel,
                           const KeyframeState& anchor,
                           const KeyframeState& target, const Pose& extrinsics,
                           const PinholeCamera& camera);

struct ReprojectionJacobians {
  Vec2 residual = Vec2::Zero();
  bool valid = false;  ///< false when the point is behind the target camera
  bool same_frame = false;
  Eigen::Matrix<double, 2, 3> d_anchor_theta;
  Eigen::Matrix<double, 2, 3> d_anchor_p;
  Eigen::Matrix<double, 2, 3> d_target_theta;
  Eigen::Matrix<double, 2, 3> d_target_p;
  Eigen::Matrix<double, 2, 3> d_uvw;
};

/// Residual plus analytic derivatives; does not throw on non-positive depth,
/// reports valid = false instead so the solver can reject the step.
ReprojectionJacobians reprojection_residual_jacobians(
    const Feature& f, const Vec2& obs_pixel, const KeyframeState& anchor,
    const KeyframeState& target, const Pose& extrinsics,
    const PinholeCamera& camera);

/// Huber robust cost on a squared norm: identity inside delta^2, linear
/// outside, C1 at the boundary.
double huber_rho(double squared_norm, double delta);

/// IRLS weight rho'(squared_norm): 1 inside delta^2, delta/sqrt outside.
double huber_weight(double squared_norm, double delta);

}  // namespace vinit
