#pragma once

#include <vector>

#include "vinit/state.hpp"

namespace vinit {

/// Keyframe orientations relative to the first keyframe's body frame,
/// integrated from gyro samples at a fixed bias.
std::vector<UnitQuaternion> integrate_rotations(
    const std::vector<std::vector<ImuSample>>& imu_segments, const Vec3& bg0);

struct ClosedFormInit {
  /// Seed states in the gravity-aligned global frame, first keyframe at the
  /// origin, biases zero.
  std::vector<KeyframeState> states;
  /// Per-feature depth along the anchor-camera ray (z component); may be
  /// tiny or negative when the geometry is degenerate.
  std::vector<double> feature_depths;
  Vec3 gravity_body0 = Vec3::Zero();  ///< rescaled gravity in the KF0 frame
  double raw_gravity_norm = 0.0;      ///< magnitude before rescaling
  bool degenerate = false;
  double condition = 0.0;  ///< singular-value ratio of the linear system
};

/// Linear bootstrap over [initial velocity, gravity, per-feature depth] from
/// bearing constraints and preintegrated IMU deltas, followed by gravity
/// rescaling and alignment of the global frame with gravity. Low-parallax
/// systems are returned with the degenerate flag set rather than rejected.
ClosedFormInit solve_linear_init(const InitWindow& window,
                                 const std::vector<UnitQuaternion>& rotations);

}  // namespace vinit
