#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vinit/state.hpp"

namespace vinit {

enum class MotionKind { kHover, kArc, kExcited };

MotionKind motion_kind_from_string(const std::string& name);
std::string to_string(MotionKind kind);

/// Synthetic scenario description. Every run is fully determined by the
/// seed; noise and corruption are individually switchable.
struct Scenario {
  MotionKind kind = MotionKind::kExcited;
  double duration_s = 0.45;
  double imu_rate_hz = 200.0;
  double cam_rate_hz = 10.0;
  int landmark_count = 150;
  double depth_min_m = 2.0;
  double depth_max_m = 10.0;

  bool imu_noise = false;
  bool pixel_noise = false;
  bool depth_noise = false;
  bool random_biases = false;
  bool depth_affine = false;  ///< random per-frame true scale/shift
  double pixel_noise_std_px = 0.5;
  double depth_noise_std = 0.005;  ///< inverse-depth units on map values
  double outlier_fraction = 0.0;   ///< in [0, 1)

  uint32_t seed = 0;

  int image_width = 640;
  int image_height = 480;
  double focal_px = 460.0;
  double gravity_magnitude = 9.81;
  NoiseModel noise;
};

/// Exact generator state for evaluation; world frame is gravity aligned.
struct GroundTruth {
  std::vector<KeyframeState> states;  ///< at keyframe timestamps
  std::vector<Vec3> landmarks;
  std::vector<double> a_star;  ///< per-keyframe true depth-map scale
  std::vector<double> b_star;  ///< per-keyframe true depth-map shift
  std::vector<int> outlier_features;  ///< landmark ids with decoy depth
  Vec3 gravity_w = Vec3(0.0, 0.0, -9.81);
  Vec3 true_ba = Vec3::Zero();
  Vec3 true_bg = Vec3::Zero();
  std::vector<int64_t> imu_timestamps_ns;
  std::vector<Vec3> accel_w;  ///< gravity-free linear acceleration per sample
  double mean_accel = 0.0;
};

struct SimResult {
  InitWindow window;
  GroundTruth truth;
};

/// Generates a full scenario: trajectory, IMU stream, feature tracks, and
/// per-keyframe inverse-depth maps with optional affine corruption, noise,
/// and decoy-surface outlier features.
SimResult generate(const Scenario& scenario);

/// Time-averaged norm of gravity-free linear acceleration.
double mean_acceleration(std::span<const Vec3> accelerations);

}  // namespace vinit
