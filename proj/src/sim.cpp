#include "vinit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

namespace vinit {

MotionKind motion_kind_from_string(const std::string& name) {
  if (name == "hover") return MotionKind::kHover;
  if (name == "arc") return MotionKind::kArc;
  if (name == "excited") return MotionKind::kExcited;
  throw InvalidScenario("unknown motion kind: " + name);
}

std::string to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::kHover: return "hover";
    case MotionKind::kArc: return "arc";
    case MotionKind::kExcited: return "excited";
  }
  return "unknown";
}

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

/// Analytic trajectory: sinusoidal translation per axis plus a sinusoidal
/// roll/pitch/yaw wobble applied to a fixed base attitude; the arc preset
/// adds circular translation and a matching yaw ramp.
struct TrajectoryModel {
  Vec3 pos_amp = Vec3::Zero();
  Vec3 pos_freq = Vec3::Zero();
  Vec3 pos_phase = Vec3::Zero();
  Vec3 ang_amp = Vec3::Zero();
  Vec3 ang_freq = Vec3::Zero();
  Vec3 ang_phase = Vec3::Zero();
  Mat3 r_base = Mat3::Identity();
  double arc_radius = 0.0;
  double arc_rate = 0.0;  // rad/s

  Vec3 position(double t) const {
    Vec3 p;
    for (int i = 0; i < 3; ++i) {
      p(i) = pos_amp(i) * std::sin(kTwoPi * pos_freq(i) * t + pos_phase(i));
    }
    if (arc_radius > 0.0) {
      p.x() += arc_radius * (std::cos(arc_rate * t) - 1.0);
      p.y() += arc_radius * std::sin(arc_rate * t);
    }
    return p;
  }

  Vec3 velocity(double t) const {
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
      const double w = kTwoPi * pos_freq(i);
      v(i) = pos_amp(i) * w * std::cos(w * t + pos_phase(i));
    }
    if (arc_radius > 0.0) {
      v.x() += -arc_radius * arc_rate * std::sin(arc_rate * t);
      v.y() += arc_radius * arc_rate * std::cos(arc_rate * t);
    }
    return v;
  }

  Vec3 acceleration(double t) const {
    Vec3 a;
    for (int i = 0; i < 3; ++i) {
      const double w = kTwoPi * pos_freq(i);
      a(i) = -pos_amp(i) * w * w * std::sin(w * t + pos_phase(i));
    }
    if (arc_radius > 0.0) {
      a.x() += -arc_radius * arc_rate * arc_rate * std::cos(arc_rate * t);
      a.y() += -arc_radius * arc_rate * arc_rate * std::sin(arc_rate * t);
    }
    return a;
  }

  Vec3 euler(double t) const {
    Vec3 e;
    for (int i = 0; i < 3; ++i) {
      e(i) = ang_amp(i) * std::sin(kTwoPi * ang_freq(i) * t + ang_phase(i));
    }
    if (arc_radius > 0.0) e.z() += arc_rate * t;  // yaw follows the arc
    return e;
  }

  Vec3 euler_rate(double t) const {
    Vec3 e;
    for (int i = 0; i < 3; ++i) {
      const double w = kTwoPi * ang_freq(i);
      e(i) = ang_amp(i) * w * std::cos(w * t + ang_phase(i));
    }
    if (arc_radius > 0.0) e.z() += arc_rate;
    return e;
  }

  Mat3 rotation(double t) const {
    const Vec3 e = euler(t);
    const Mat3 wobble =
        (Eigen::AngleAxisd(e.z(), Vec3::UnitZ()) *
         Eigen::AngleAxisd(e.y(), Vec3::UnitY()) *
         Eigen::AngleAxisd(e.x(), Vec3::UnitX()))
            .toRotationMatrix();
    return r_base * wobble;
  }

  /// Body angular velocity of the ZYX wobble; the base attitude is constant.
  Vec3 body_rate(double t) const {
    const Vec3 e = euler(t);
    const Vec3 ed = euler_rate(t);
    const double sphi = std::sin(e.x()), cphi = std::cos(e.x());
    const double stheta = std::sin(e.y()), ctheta = std::cos(e.y());
    return Vec3(ed.x() - ed.z() * stheta,
                ed.y() * cphi + ed.z() * ctheta * sphi,
                -ed.y() * sphi + ed.z() * ctheta * cphi);
  }
};

Mat3 camera_base_in_world() {
  // Camera right -> -y (world y is left), camera down -> -z, optical -> +x.
  Mat3 r;
  r.col(0) = Vec3(0.0, -1.0, 0.0);
  r.col(1) = Vec3(0.0, 0.0, -1.0);
  r.col(2) = Vec3(1.0, 0.0, 0.0);
  return r;
}

TrajectoryModel make_trajectory(const Scenario& sc, std::mt19937& rng) {
  TrajectoryModel model;
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  model.pos_phase = Vec3(phase(rng), phase(rng), phase(rng));
  model.ang_phase = Vec3(phase(rng), phase(rng), phase(rng));
  switch (sc.kind) {
    case MotionKind::kHover:
      model.pos_amp = Vec3(1.2e-3, 0.9e-3, 0.7e-3);
      model.pos_freq = Vec3(0.8, 0.6, 0.5);
      model.ang_amp = Vec3(1.0, 1.0, 2.0) * (M_PI / 180.0);
      model.ang_freq = Vec3(0.5, 0.4, 0.3);
      break;
    case MotionKind::kArc:
      model.pos_amp = Vec3(0.01, 0.008, 0.012);
      model.pos_freq = Vec3(0.9, 0.7, 0.8);
      model.ang_amp = Vec3(2.0, 1.5, 2.0) * (M_PI / 180.0);
      model.ang_freq = Vec3(0.6, 0.5, 0.4);
      model.arc_radius = 0.5;
      model.arc_rate = 0.4;
      break;
    case MotionKind::kExcited:
      model.pos_amp = Vec3(0.05, 0.04, 0.03);
      model.pos_freq = Vec3(1.2, 1.0, 0.8);
      model.ang_amp = Vec3(6.0, 5.0, 8.0) * (M_PI / 180.0);
      model.ang_freq = Vec3(0.9, 0.7, 0.5);
      break;
  }
  const Pose extrinsics = default_sim_extrinsics();
  model.r_base =
      camera_base_in_world() * extrinsics.rotation.matrix().transpose();
  return model;
}

void validate(const Scenario& sc) {
  if (sc.duration_s <= 0.0 || sc.imu_rate_hz <= 0.0 || sc.cam_rate_hz <= 0.0) {
    throw InvalidScenario("rates and duration must be positive");
  }
  if (sc.depth_min_m <= 0.0 || sc.depth_max_m <= sc.depth_min_m) {
    throw InvalidScenario("depth range must be positive and increasing");
  }
  if (sc.outlier_fraction < 0.0 || sc.outlier_fraction >= 1.0) {
    throw InvalidScenario("outlier fraction must lie in [0, 1)");
  }
  if (sc.landmark_count < 3) {
    throw InvalidScenario("need at least three landmarks");
  }
  if (sc.imu_rate_hz < 2.0 * sc.cam_rate_hz) {
    throw InvalidScenario("IMU rate must comfortably exceed camera rate");
  }
}

/// Grid Voronoi labels by multi-source BFS from the seed pixels.
std::vector<int> voronoi_labels(int width, int height,
                                const std::vector<std::pair<int, int>>& seeds,
                                const std::vector<int>& seed_ids) {
  std::vector<int> label(static_cast<size_t>(width) * height, -1);
  std::queue<std::pair<int, int>> frontier;
  for (size_t s = 0; s < seeds.size(); ++s) {
    const auto [x, y] = seeds[s];
    const size_t idx = static_cast<size_t>(y) * width + x;
    if (label[idx] < 0) {
      label[idx] = seed_ids[s];
      frontier.emplace(x, y);
    }
  }
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  while (!frontier.empty()) {
    const auto [x, y] = frontier.front();
    frontier.pop();
    const int id = label[static_cast<size_t>(y) * width + x];
    for (int d = 0; d < 4; ++d) {
      const int nx = x + dx[d];
      const int ny = y + dy[d];
      if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
      const size_t nidx = static_cast<size_t>(ny) * width + nx;
      if (label[nidx] < 0) {
        label[nidx] = id;
        frontier.emplace(nx, ny);
      }
    }
  }
  return label;
}

}  // namespace

Pose default_sim_extrinsics() {
  return Pose(UnitQuaternion::exp(Vec3(0.02, -0.015, 0.01)),
              Vec3(0.015, -0.008, 0.02));
}

SimResult generate(const Scenario& sc) {
  validate(sc);
  std::mt19937 rng(sc.seed);
  SimResult result;
  InitWindow& window = result.window;
  GroundTruth& truth = result.truth;

  const TrajectoryModel model = make_trajectory(sc, rng);

  window.camera.fx = sc.focal_px;
  window.camera.fy = sc.focal_px;
  window.camera.cx = (sc.image_width - 1) / 2.0;
  window.camera.cy = (sc.image_height - 1) / 2.0;
  window.camera.width = sc.image_width;
  window.camera.height = sc.image_height;
  window.extrinsics = default_sim_extrinsics();
  window.gravity_magnitude = sc.gravity_magnitude;

  truth.gravity_w = Vec3(0.0, 0.0, -sc.gravity_magnitude);
  if (sc.random_biases) {
    std::uniform_real_distribution<double> ba_dist(-0.05, 0.05);
    std::uniform_real_distribution<double> bg_dist(-0.005, 0.005);
    truth.true_ba = Vec3(ba_dist(rng), ba_dist(rng), ba_dist(rng));
    truth.true_bg = Vec3(bg_dist(rng), bg_dist(rng), bg_dist(rng));
  }

  // Timestamp grids; the IMU stream covers the full duration.
  const int64_t imu_dt_ns =
      static_cast<int64_t>(std::llround(1e9 / sc.imu_rate_hz));
  const int64_t cam_dt_ns =
      static_cast<int64_t>(std::llround(1e9 / sc.cam_rate_hz));
  const int64_t duration_ns =
      static_cast<int64_t>(std::llround(sc.duration_s * 1e9));

  std::vector<int64_t> frame_ts;
  for (int64_t t = 0; t <= duration_ns; t += cam_dt_ns) frame_ts.push_back(t);
  if (frame_ts.size() < 2) {
    throw InvalidScenario("duration too short for two keyframes");
  }
  const size_t n_frames = frame_ts.size();

  std::normal_distribution<double> gauss(0.0, 1.0);
  const double gyro_noise_std =
      sc.noise.gyro_noise_density * std::sqrt(sc.imu_rate_hz);
  const double accel_noise_std =
      sc.noise.accel_noise_density * std::sqrt(sc.imu_rate_hz);

  std::vector<ImuSample> imu_stream;
  for (int64_t t = 0; t <= duration_ns; t += imu_dt_ns) {
    const double ts = static_cast<double>(t) * 1e-9;
    const Mat3 r_wb = model.rotation(ts);
    const Vec3 a_w = model.acceleration(ts);
    ImuSample sample;
    sample.timestamp_ns = t;
    sample.gyro = model.body_rate(ts) + truth.true_bg;
    sample.accel = r_wb.transpose() * (a_w - truth.gravity_w) + truth.true_ba;
    if (sc.imu_noise) {
      sample.gyro += gyro_noise_std * Vec3(gauss(rng), gauss(rng), gauss(rng));
      sample.accel +=
          accel_noise_std * Vec3(gauss(rng), gauss(rng), gauss(rng));
    }
    imu_stream.push_back(sample);
    truth.imu_timestamps_ns.push_back(t);
    truth.accel_w.push_back(a_w);
  }
  truth.mean_accel = mean_acceleration(truth.accel_w);

  // Keyframe slots and ground-truth states.
  window.keyframes.resize(n_frames);
  truth.states.resize(n_frames);
  for (size_t k = 0; k < n_frames; ++k) {
    const double ts = static_cast<double>(frame_ts[k]) * 1e-9;
    KeyframeState gt;
    gt.timestamp_ns = frame_ts[k];
    gt.q = UnitQuaternion::from_matrix(model.rotation(ts));
    gt.p = model.position(ts);
    gt.v = model.velocity(ts);
    gt.ba = truth.true_ba;
    gt.bg = truth.true_bg;
    truth.states[k] = gt;
    window.keyframes[k].timestamp_ns = frame_ts[k];
  }

  // IMU segments between consecutive keyframes, boundary samples inclusive.
  window.imu_segments.resize(n_frames - 1);
  for (size_t k = 0; k + 1 < n_frames; ++k) {
    for (const auto& s : imu_stream) {
      if (s.timestamp_ns >= frame_ts[k] && s.timestamp_ns <= frame_ts[k + 1]) {
        window.imu_segments[k].push_back(s);
      }
    }
  }
  window.data_end_ns = duration_ns;

  // Landmarks: back-projected through the first camera so every one starts
  // visible, uniformly spread over the image and the depth range.
  std::uniform_real_distribution<double> px_dist(40.0, sc.image_width - 41.0);
  std::uniform_real_distribution<double> py_dist(40.0, sc.image_height - 41.0);
  std::uniform_real_distribution<double> z_dist(sc.depth_min_m, sc.depth_max_m);
  const Pose cam0 = truth.states[0].pose() * window.extrinsics;
  truth.landmarks.resize(sc.landmark_count);
  for (int i = 0; i < sc.landmark_count; ++i) {
    const Vec2 px(px_dist(rng), py_dist(rng));
    truth.landmarks[i] = cam0.apply(window.camera.unproject(px, z_dist(rng)));
  }

  // Decoy assignment for labeled outlier features.
  const int n_outliers =
      static_cast<int>(std::lround(sc.outlier_fraction * sc.landmark_count));
  std::vector<int> ids(sc.landmark_count);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  truth.outlier_features.assign(ids.begin(), ids.begin() + n_outliers);
  std::sort(truth.outlier_features.begin(), truth.outlier_features.end());

  std::vector<double> decoy_factor(sc.landmark_count, 1.0);
  std::vector<std::vector<char>> decoy_at(
      sc.landmark_count, std::vector<char>(n_frames, 0));
  {
    std::uniform_real_distribution<double> factor(1.5, 2.5);
    for (int id : truth.outlier_features) {
      decoy_factor[id] = factor(rng);
      std::uniform_int_distribution<int> count(
          1, static_cast<int>(n_frames) - 1);
      const int corrupt = count(rng);
      std::vector<int> frames(n_frames);
      std::iota(frames.begin(), frames.end(), 0);
      std::shuffle(frames.begin(), frames.end(), rng);
      for (int c = 0; c < corrupt; ++c) decoy_at[id][frames[c]] = 1;
    }
  }

  // Tracks: project every landmark into every frame, cull, add pixel noise.
  std::vector<std::vector<std::pair<int, Vec2>>> tracks(sc.landmark_count);
  std::vector<std::vector<std::pair<int, double>>> true_depths(
      sc.landmark_count);  // (frame, z in camera)
  for (size_t k = 0; k < n_frames; ++k) {
    const Pose cam_pose = truth.states[k].pose() * window.extrinsics;
    const Pose world_to_cam = cam_pose.inverse();
    for (int i = 0; i < sc.landmark_count; ++i) {
      const Vec3 pc = world_to_cam.apply(truth.landmarks[i]);
      if (pc.z() < 0.2) continue;
      const Vec2 px = window.camera.project(pc);
      if (!window.camera.in_bounds(px, 1.0)) continue;
      Vec2 measured = px;
      if (sc.pixel_noise) {
        measured += sc.pixel_noise_std_px * Vec2(gauss(rng), gauss(rng));
      }
      tracks[i].emplace_back(static_cast<int>(k), measured);
      true_depths[i].emplace_back(static_cast<int>(k), pc.z());
    }
  }

  for (int i = 0; i < sc.landmark_count; ++i) {
    if (tracks[i].size() < 2) continue;
    Feature f;
    f.id = i;
    f.anchor_keyframe = tracks[i].front().first;
    const Vec2 n = window.camera.normalize(tracks[i].front().second);
    f.u = n.x();
    f.v = n.y();
    f.w = 0.0;
    for (const auto& [k, px] : tracks[i]) {
      Feature::Observation obs;
      obs.keyframe = k;
      obs.pixel = px;
      f.observations.push_back(obs);
    }
    window.features.push_back(std::move(f));
  }

  // Per-keyframe affine corruption of the stored inverse depth.
  truth.a_star.assign(n_frames, 1.0);
  truth.b_star.assign(n_frames, 0.0);
  if (sc.depth_affine) {
    std::uniform_real_distribution<double> a_dist(0.8, 1.25);
    std::uniform_real_distribution<double> b_dist(-0.04, 0.03);
    for (size_t k = 0; k < n_frames; ++k) {
      truth.a_star[k] = a_dist(rng);
      truth.b_star[k] = b_dist(rng);
    }
  }

  // Dense inverse-depth maps: nearest-landmark cells carrying each
  // landmark's true inverse depth, decoy-scaled for corrupted features,
  // then mapped through the inverse affine so a*d + b* recovers metric.
  window.depth_maps.resize(n_frames);
  window.images.resize(n_frames);
  if (sc.depth_maps) {
    for (size_t k = 0; k < n_frames; ++k) {
      std::vector<std::pair<int, int>> seeds;
      std::vector<int> seed_ids;
      std::vector<double> z_inv(sc.landmark_count, 0.0);
      for (int i = 0; i < sc.landmark_count; ++i) {
        for (const auto& [frame, depth] : true_depths[i]) {
          if (frame != static_cast<int>(k)) continue;
          double value = 1.0 / depth;
          if (decoy_at[i][k]) value *= decoy_factor[i];
          z_inv[i] = value;
          // Seeds use the true projection so each landmark owns its cell.
          for (const auto& [frame2, px] : tracks[i]) {
            if (frame2 == static_cast<int>(k)) {
              // tracks hold noisy pixels; recompute the true one.
            }
          }
        }
      }
      const Pose cam_pose = truth.states[k].pose() * window.extrinsics;
      const Pose world_to_cam = cam_pose.inverse();
      for (int i = 0; i < sc.landmark_count; ++i) {
        const Vec3 pc = world_to_cam.apply(truth.landmarks[i]);
        if (pc.z() < 0.2) continue;
        const Vec2 px = window.camera.project(pc);
        if (!window.camera.in_bounds(px, 1.0)) continue;
        seeds.emplace_back(static_cast<int>(std::lround(px.x())),
                           static_cast<int>(std::lround(px.y())));
        seed_ids.push_back(i);
      }
      DepthMap map(sc.image_width, sc.image_height, 0.0f);
      if (!seeds.empty()) {
        const std::vector<int> labels =
            voronoi_labels(sc.image_width, sc.image_height, seeds, seed_ids);
        for (int y = 0; y < sc.image_height; ++y) {
          for (int x = 0; x < sc.image_width; ++x) {
            const int id = labels[static_cast<size_t>(y) * sc.image_width + x];
            double value = id >= 0 ? z_inv[id] : 1.0 / sc.depth_max_m;
            value = (value - truth.b_star[k]) / truth.a_star[k];
            if (sc.depth_noise) value += sc.depth_noise_std * gauss(rng);
            map.at(x, y) = static_cast<float>(value);
          }
        }
      }
      window.depth_maps[k] = std::move(map);
    }
  }

  return result;
}

double mean_acceleration(std::span<const Vec3> accelerations) {
  if (accelerations.size() < 2) {
    throw Error("mean acceleration needs at least two samples");
  }
  double sum = 0.0;
  for (const Vec3& a : accelerations) sum += a.norm();
  return sum / static_cast<double>(accelerations.size());
}

}  // namespace vinit
