#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vinit/geometry.hpp"

namespace vinit {

struct ImuSample {
  int64_t timestamp_ns = 0;
  Vec3 gyro = Vec3::Zero();   ///< rad/s
  Vec3 accel = Vec3::Zero();  ///< m/s^2, specific force
};

/// Continuous-time noise densities; all strictly positive.
struct NoiseModel {
  double gyro_noise_density = 1.7e-4;   ///< rad/s/sqrt(Hz)
  double accel_noise_density = 2.0e-3;  ///< m/s^2/sqrt(Hz)
  double gyro_bias_random_walk = 1.9e-5;   ///< rad/s^2/sqrt(Hz)
  double accel_bias_random_walk = 3.0e-3;  ///< m/s^3/sqrt(Hz)
};

/// Relative motion between two keyframes summarized from IMU samples,
/// expressed in the first keyframe's body frame and linearized at fixed
/// biases (ba0, bg0).
struct PreintegratedImu {
  UnitQuaternion delta_q;
  Vec3 delta_v = Vec3::Zero();
  Vec3 delta_p = Vec3::Zero();

  /// 9x9, ordered [rotation, velocity, position].
  Mat9 covariance = Mat9::Zero();

  // First-order sensitivities to the linearization biases.
  Mat3 dq_dbg = Mat3::Zero();
  Mat3 dv_dba = Mat3::Zero();
  Mat3 dv_dbg = Mat3::Zero();
  Mat3 dp_dba = Mat3::Zero();
  Mat3 dp_dbg = Mat3::Zero();

  double dt_total = 0.0;
  Vec3 ba0 = Vec3::Zero();
  Vec3 bg0 = Vec3::Zero();
};

/// Midpoint-rule preintegration with first-order covariance propagation.
/// Requires at least two samples with strictly increasing timestamps.
PreintegratedImu preintegrate(std::span<const ImuSample> samples,
                              const Vec3& ba0, const Vec3& bg0,
                              const NoiseModel& noise);

/// Chains two consecutive preintegrations (covariances are not combined;
/// intended for the closed-form seed where only the deltas matter).
PreintegratedImu chain(const PreintegratedImu& first,
                       const PreintegratedImu& second);

struct KeyframeState;

/// 15-dim residual [rotation; velocity; position; accel-bias diff; gyro-bias
/// diff] between consecutive keyframe states and the preintegrated deltas,
/// with first-order bias correction around (ba0, bg0).
Vec15 inertial_residual(const KeyframeState& xi, const KeyframeState& xj,
                        const PreintegratedImu& pre, const Vec3& gravity);

struct InertialJacobians {
  Vec15 residual = Vec15::Zero();
  /// Columns ordered [theta(3), p(3), v(3), ba(3), bg(3)] per state.
  Mat15 d_xi = Mat15::Zero();
  Mat15 d_xj = Mat15::Zero();
};

InertialJacobians inertial_residual_jacobians(const KeyframeState& xi,
                                              const KeyframeState& xj,
                                              const PreintegratedImu& pre,
                                              const Vec3& gravity);

/// Square root information whitening the 15-dim residual: the preintegration
/// covariance for the first nine rows and the bias random walk accumulated
/// over the segment for the last six.
Mat15 inertial_sqrt_information(const PreintegratedImu& pre,
                                const NoiseModel& noise);

/// [ba - prior_ba; bg - prior_bg] for the first keyframe.
Vec6 bias_prior_residual(const KeyframeState& x0, const Vec3& prior_ba,
                         const Vec3& prior_bg);

}  // namespace vinit
