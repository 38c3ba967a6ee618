#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vinit/geometry.hpp"
#include "vinit/image.hpp"
#include "vinit/imu.hpp"

namespace vinit {

/// Full state of one keyframe: IMU-to-global pose, velocity, and biases.
struct KeyframeState {
  UnitQuaternion q;            ///< IMU-to-global rotation
  Vec3 p = Vec3::Zero();       ///< position, meters
  Vec3 v = Vec3::Zero();       ///< velocity, m/s
  Vec3 ba = Vec3::Zero();      ///< accelerometer bias, m/s^2
  Vec3 bg = Vec3::Zero();      ///< gyro bias, rad/s
  int64_t timestamp_ns = 0;

  Pose pose() const { return Pose(q, p); }
};

/// Sparse feature parameterized as [u, v, w] in its anchor keyframe's camera:
/// (u, v) on the normalized image plane, w the inverse depth.
struct Feature {
  struct Observation {
    int keyframe = -1;
    Vec2 pixel = Vec2::Zero();
    std::optional<double> mono_inverse_depth;  ///< raw model value at pixel
  };

  int id = -1;
  int anchor_keyframe = -1;
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;  ///< inverse depth, 1/m; positive for a valid feature
  std::vector<Observation> observations;

  const Observation* observation_in(int keyframe) const {
    for (const auto& obs : observations) {
      if (obs.keyframe == keyframe) return &obs;
    }
    return nullptr;
  }
};

/// Per-keyframe affine correction for the mono-depth model. The scale is
/// optimized through the free variable s and recovered with a softplus so it
/// can never reach zero or go negative.
struct ScaleShift {
  double s = 0.0;  ///< free scale variable
  double b = 0.0;  ///< shift, inverse-depth units

  double scale() const;
};

inline constexpr double kScaleEpsilon = 1e-5;

/// a = eps + log(e^s + 1), numerically stable for large |s|.
double scale_from_free(double s);

/// Inverse of scale_from_free; valid for a > eps.
double free_from_scale(double a);

/// d(scale_from_free)/ds.
double scale_from_free_derivative(double s);

/// Everything a single initialization attempt consumes.
struct InitWindow {
  std::vector<KeyframeState> keyframes;  ///< slots; timestamps must be set
  std::vector<std::optional<DepthMap>> depth_maps;  ///< per keyframe
  std::vector<std::optional<Image>> images;         ///< per keyframe
  std::vector<Feature> features;
  std::vector<std::vector<ImuSample>> imu_segments;  ///< size N-1
  Pose extrinsics;  ///< camera-to-IMU
  PinholeCamera camera;
  double gravity_magnitude = 9.81;
  int64_t data_end_ns = 0;  ///< end of the data span covered by the window

  size_t keyframe_count() const { return keyframes.size(); }
  bool has_depth() const {
    for (const auto& d : depth_maps) {
      if (d.has_value()) return true;
    }
    return false;
  }
};

/// Lifts the feature in its anchor camera and maps it into the target camera
/// frame. Poses are IMU-to-global; extrinsics camera-to-IMU. The z component
/// of the result is the feature's depth in the target camera.
Vec3 feature_point_in_camera(const Feature& f, const Pose& anchor_pose,
                             const Pose& target_pose, const Pose& extrinsics);

/// Partial derivatives of the target-camera point for the full parameter
/// chain, with rotations perturbed on the right tangent space. When the
/// anchor and target poses coincide the pose terms vanish identically.
struct FeaturePointJacobians {
  Vec3 point_c = Vec3::Zero();
  Mat3 d_anchor_theta = Mat3::Zero();
  Mat3 d_anchor_p = Mat3::Zero();
  Mat3 d_target_theta = Mat3::Zero();
  Mat3 d_target_p = Mat3::Zero();
  Mat3 d_uvw = Mat3::Zero();  ///< columns: d/du, d/dv, d/dw
  bool same_frame = false;
};

FeaturePointJacobians feature_point_in_camera_jacobians(
    const Feature& f, const Pose& anchor_pose, const Pose& target_pose,
    const Pose& extrinsics);

}  // namespace vinit
