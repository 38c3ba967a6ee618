#include "vinit/closedform.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

namespace vinit {

std::vector<UnitQuaternion> integrate_rotations(
    const std::vector<std::vector<ImuSample>>& imu_segments, const Vec3& bg0) {
  std::vector<UnitQuaternion> rotations;
  rotations.reserve(imu_segments.size() + 1);
  rotations.push_back(UnitQuaternion::identity());
  UnitQuaternion q;
  for (const auto& segment : imu_segments) {
    if (segment.size() < 2) {
      throw EmptySegment("rotation integration needs two samples per segment");
    }
    for (size_t i = 0; i + 1 < segment.size(); ++i) {
      if (segment[i + 1].timestamp_ns <= segment[i].timestamp_ns) {
        throw NonMonotonicTimestamps("IMU timestamps must strictly increase");
      }
      const double dt =
          static_cast<double>(segment[i + 1].timestamp_ns -
                              segment[i].timestamp_ns) * 1e-9;
      const Vec3 omega = 0.5 * (segment[i].gyro + segment[i + 1].gyro) - bg0;
      q = q * UnitQuaternion::exp(omega * dt);
    }
    rotations.push_back(q);
  }
  return rotations;
}

namespace {

/// Two orthonormal rows spanning the plane orthogonal to b, times skew(b).
Eigen::Matrix<double, 2, 3> bearing_constraint_rows(const Vec3& b) {
  const Vec3 unit = b.normalized();
  const Vec3 seed =
      std::abs(unit.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u1 = unit.cross(seed).normalized();
  const Vec3 u2 = unit.cross(u1).normalized();
  Eigen::Matrix<double, 2, 3> rows;
  rows.row(0) = u1.transpose() * skew(b);
  rows.row(1) = u2.transpose() * skew(b);
  return rows;
}

UnitQuaternion rotation_between(const Vec3& from_unit, const Vec3& to_unit) {
  const double c = from_unit.dot(to_unit);
  const Vec3 axis = from_unit.cross(to_unit);
  const double s = axis.norm();
  if (s < 1e-12) {
    if (c > 0.0) return UnitQuaternion::identity();
    // Antipodal: rotate half a turn about any orthogonal axis.
    const Vec3 seed =
        std::abs(from_unit.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    return UnitQuaternion::exp(M_PI * from_unit.cross(seed).normalized());
  }
  return UnitQuaternion::exp(std::atan2(s, c) * axis / s);
}

}  // namespace

ClosedFormInit solve_linear_init(const InitWindow& window,
                                 const std::vector<UnitQuaternion>& rotations) {
  const size_t n = window.keyframes.size();
  if (n < 2) {
    throw Error("linear initialization needs at least two keyframes");
  }
  if (rotations.size() != n) {
    throw Error("one rotation per keyframe expected");
  }

  // Cumulative preintegration from the first keyframe, zero biases.
  const NoiseModel unit_noise;
  std::vector<PreintegratedImu> cumulative(n);
  for (size_t k = 0; k + 1 < n; ++k) {
    const PreintegratedImu seg = preintegrate(
        window.imu_segments[k], Vec3::Zero(), Vec3::Zero(), unit_noise);
    cumulative[k + 1] = k == 0 ? seg : chain(cumulative[k], seg);
  }

  std::vector<double> t(n, 0.0);
  for (size_t k = 1; k < n; ++k) t[k] = cumulative[k].dt_total;

  const size_t m = window.features.size();
  size_t usable = 0;
  size_t row_count = 0;
  for (const auto& f : window.features) {
    if (f.observations.size() >= 2) {
      ++usable;
      row_count += 2 * (f.observations.size() - 1);
    }
  }
  if (usable < 3) {
    throw DegenerateGeometry(
        "linear initialization needs three features seen twice");
  }

  // Camera orientation and lever arm per keyframe, in the KF0 body frame.
  const Mat3 r_c = window.extrinsics.rotation.matrix();
  const Vec3 p_c = window.extrinsics.translation;
  std::vector<Mat3> r_wb(n), r_wc(n);
  for (size_t k = 0; k < n; ++k) {
    r_wb[k] = rotations[k].matrix();
    r_wc[k] = r_wb[k] * r_c;
  }

  // Unknowns: [v0 (3); g (3); depth per feature (m)].
  const size_t cols = 6 + m;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<long>(row_count), cols);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<long>(row_count));

  long row = 0;
  for (size_t i = 0; i < m; ++i) {
    const Feature& f = window.features[i];
    if (f.observations.size() < 2) continue;
    const int anchor = f.anchor_keyframe;
    const Vec3 ray_anchor = r_wc[anchor] * Vec3(f.u, f.v, 1.0);
    for (const auto& obs : f.observations) {
      if (obs.keyframe == anchor) continue;
      const int k = obs.keyframe;
      const Vec2 nk = window.camera.normalize(obs.pixel);
      const Vec3 bearing = r_wc[k] * Vec3(nk.x(), nk.y(), 1.0);
      const Eigen::Matrix<double, 2, 3> c = bearing_constraint_rows(bearing);

      const double dt_ak = t[anchor] - t[k];
      const double dt2 = t[anchor] * t[anchor] - t[k] * t[k];
      const Vec3 known = (cumulative[anchor].delta_p - cumulative[k].delta_p) +
                         (r_wb[anchor] - r_wb[k]) * p_c;

      a.block<2, 3>(row, 0) = c * dt_ak;
      a.block<2, 3>(row, 3) = c * 0.5 * dt2;
      a.block<2, 1>(row, 6 + i) = c * ray_anchor;
      rhs.segment<2>(row) = -c * known;
      row += 2;
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double s_max = sv(0);
  const double s_min = sv(sv.size() - 1);

  ClosedFormInit out;
  out.condition = s_min > 0.0 ? s_max / s_min
                              : std::numeric_limits<double>::infinity();
  // Condition of the normal matrix is the square of the spectrum ratio.
  out.degenerate = !(out.condition * out.condition < 1e12) ||
                   row < static_cast<long>(cols);

  const Eigen::VectorXd x = svd.solve(rhs);
  const Vec3 v0 = x.segment<3>(0);
  Vec3 gravity = x.segment<3>(3);
  out.raw_gravity_norm = gravity.norm();

  if (out.raw_gravity_norm < 1e-12) {
    out.degenerate = true;
    gravity = Vec3(0.0, 0.0, -window.gravity_magnitude);
  } else {
    gravity *= window.gravity_magnitude / out.raw_gravity_norm;
  }
  out.gravity_body0 = gravity;

  out.feature_depths.assign(m, 0.0);
  for (size_t i = 0; i < m; ++i) {
    out.feature_depths[i] = x(static_cast<long>(6 + i));
  }

  // Rotate the frame so gravity lands on -z; yaw stays free.
  const UnitQuaternion q_align = rotation_between(
      gravity.normalized(), Vec3(0.0, 0.0, -1.0));

  out.states.resize(n);
  for (size_t k = 0; k < n; ++k) {
    KeyframeState& state = out.states[k];
    state.timestamp_ns = window.keyframes[k].timestamp_ns;
    const Vec3 p_w = v0 * t[k] + 0.5 * gravity * t[k] * t[k] +
                     cumulative[k].delta_p;
    const Vec3 v_w = v0 + gravity * t[k] + cumulative[k].delta_v;
    state.q = q_align * rotations[k];
    state.p = q_align.rotate(p_w);
    state.v = q_align.rotate(v_w);
    state.ba = Vec3::Zero();
    state.bg = Vec3::Zero();
  }
  return out;
}

}  // namespace vinit
