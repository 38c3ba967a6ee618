#include "vinit/imu.hpp"

#include <cmath>

#include "vinit/state.hpp"

namespace vinit {

PreintegratedImu preintegrate(std::span<const ImuSample> samples,
                              const Vec3& ba0, const Vec3& bg0,
                              const NoiseModel& noise) {
  if (samples.size() < 2) {
    throw EmptySegment("preintegration needs at least two samples");
  }
  PreintegratedImu out;
  out.ba0 = ba0;
  out.bg0 = bg0;

  const double var_g = noise.gyro_noise_density * noise.gyro_noise_density;
  const double var_a = noise.accel_noise_density * noise.accel_noise_density;

  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    const ImuSample& s0 = samples[i];
    const ImuSample& s1 = samples[i + 1];
    if (s1.timestamp_ns <= s0.timestamp_ns) {
      throw NonMonotonicTimestamps("IMU timestamps must strictly increase");
    }
    const double dt = static_cast<double>(s1.timestamp_ns - s0.timestamp_ns) * 1e-9;

    const Vec3 omega = 0.5 * (s0.gyro + s1.gyro) - bg0;
    const Vec3 a0 = s0.accel - ba0;
    const Vec3 a1 = s1.accel - ba0;

    const Vec3 phi = omega * dt;
    const Mat3 exp_phi = UnitQuaternion::exp(phi).matrix();
    const Mat3 jr_phi = so3_right_jacobian(phi);

    const Mat3 r0 = out.delta_q.matrix();
    const UnitQuaternion q_next = out.delta_q * UnitQuaternion::exp(phi);
    const Mat3 r1 = q_next.matrix();

    const Vec3 un_acc = 0.5 * (r0 * a0 + r1 * a1);

    // First-order transition of the [theta, v, p] error and the response of
    // the averaged acceleration to rotation error, gyro input, accel input.
    const Mat3 m_theta =
        -0.5 * (r0 * skew(a0) + r1 * skew(a1) * exp_phi.transpose());
    const Mat3 m_gyro = -0.5 * r1 * skew(a1) * jr_phi * dt;
    const Mat3 m_acc = 0.5 * (r0 + r1);

    Mat9 f = Mat9::Identity();
    f.block<3, 3>(0, 0) = exp_phi.transpose();
    f.block<3, 3>(3, 0) = m_theta * dt;
    f.block<3, 3>(6, 0) = 0.5 * m_theta * dt * dt;
    f.block<3, 3>(6, 3) = Mat3::Identity() * dt;

    Eigen::Matrix<double, 9, 6> b = Eigen::Matrix<double, 9, 6>::Zero();
    b.block<3, 3>(0, 0) = jr_phi * dt;
    b.block<3, 3>(3, 0) = m_gyro * dt;
    b.block<3, 3>(3, 3) = m_acc * dt;
    b.block<3, 3>(6, 0) = 0.5 * m_gyro * dt * dt;
    b.block<3, 3>(6, 3) = 0.5 * m_acc * dt * dt;

    Mat6 q_noise = Mat6::Zero();
    q_noise.topLeftCorner<3, 3>() = (var_g / dt) * Mat3::Identity();
    q_noise.bottomRightCorner<3, 3>() = (var_a / dt) * Mat3::Identity();

    out.covariance = f * out.covariance * f.transpose() +
                     b * q_noise * b.transpose();
    // Keep symmetric against accumulation drift.
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();

    // Bias sensitivities share the transition; bias enters as negative input.
    const Mat3 dv_dbg_new =
        out.dv_dbg + (m_theta * out.dq_dbg - m_gyro) * dt;
    const Mat3 dv_dba_new = out.dv_dba - m_acc * dt;
    out.dp_dbg += out.dv_dbg * dt +
                  0.5 * dt * dt * (m_theta * out.dq_dbg - m_gyro);
    out.dp_dba += out.dv_dba * dt - 0.5 * m_acc * dt * dt;
    out.dq_dbg = exp_phi.transpose() * out.dq_dbg - jr_phi * dt;
    out.dv_dbg = dv_dbg_new;
    out.dv_dba = dv_dba_new;

    out.delta_p += out.delta_v * dt + 0.5 * un_acc * dt * dt;
    out.delta_v += un_acc * dt;
    out.delta_q = q_next;
    out.dt_total += dt;
  }
  return out;
}

PreintegratedImu chain(const PreintegratedImu& first,
                       const PreintegratedImu& second) {
  PreintegratedImu out;
  out.ba0 = first.ba0;
  out.bg0 = first.bg0;
  const Mat3 r1 = first.delta_q.matrix();
  out.delta_q = first.delta_q * second.delta_q;
  out.delta_v = first.delta_v + r1 * second.delta_v;
  out.delta_p = first.delta_p + first.delta_v * second.dt_total +
                r1 * second.delta_p;
  out.dt_total = first.dt_total + second.dt_total;
  return out;
}

Vec15 inertial_residual(const KeyframeState& xi, const KeyframeState& xj,
                        const PreintegratedImu& pre, const Vec3& gravity) {
  const double dt = pre.dt_total;
  const Vec3 dbg = xi.bg - pre.bg0;
  const Vec3 dba = xi.ba - pre.ba0;

  const UnitQuaternion delta_q_corr =
      pre.delta_q * UnitQuaternion::exp(pre.dq_dbg * dbg);
  const Vec3 delta_v_corr = pre.delta_v + pre.dv_dba * dba + pre.dv_dbg * dbg;
  const Vec3 delta_p_corr = pre.delta_p + pre.dp_dba * dba + pre.dp_dbg * dbg;

  const Mat3 ri_t = xi.q.matrix().transpose();

  Vec15 r;
  r.segment<3>(0) =
      (delta_q_corr.inverse() * (xi.q.inverse() * xj.q)).log();
  r.segment<3>(3) = ri_t * (xj.v - xi.v - gravity * dt) - delta_v_corr;
  r.segment<3>(6) =
      ri_t * (xj.p - xi.p - xi.v * dt - 0.5 * gravity * dt * dt) -
      delta_p_corr;
  r.segment<3>(9) = xj.ba - xi.ba;
  r.segment<3>(12) = xj.bg - xi.bg;
  return r;
}

InertialJacobians inertial_residual_jacobians(const KeyframeState& xi,
                                              const KeyframeState& xj,
                                              const PreintegratedImu& pre,
                                              const Vec3& gravity) {
  InertialJacobians out;
  out.residual = inertial_residual(xi, xj, pre, gravity);

  const double dt = pre.dt_total;
  const Vec3 dbg = xi.bg - pre.bg0;
  const Mat3 ri = xi.q.matrix();
  const Mat3 ri_t = ri.transpose();
  const Mat3 rj = xj.q.matrix();

  const Vec3 r_q = out.residual.segment<3>(0);
  const Mat3 jr_inv = so3_right_jacobian_inverse(r_q);
  const Mat3 jl_inv = jr_inv.transpose();

  // Rotation rows.
  out.d_xi.block<3, 3>(0, 0) = -jr_inv * (rj.transpose() * ri);
  out.d_xi.block<3, 3>(0, 12) =
      -jl_inv * so3_right_jacobian(pre.dq_dbg * dbg) * pre.dq_dbg;
  out.d_xj.block<3, 3>(0, 0) = jr_inv;

  // Velocity rows.
  out.d_xi.block<3, 3>(3, 0) = skew(ri_t * (xj.v - xi.v - gravity * dt));
  out.d_xi.block<3, 3>(3, 6) = -ri_t;
  out.d_xi.block<3, 3>(3, 9) = -pre.dv_dba;
  out.d_xi.block<3, 3>(3, 12) = -pre.dv_dbg;
  out.d_xj.block<3, 3>(3, 6) = ri_t;

  // Position rows.
  out.d_xi.block<3, 3>(6, 0) =
      skew(ri_t * (xj.p - xi.p - xi.v * dt - 0.5 * gravity * dt * dt));
  out.d_xi.block<3, 3>(6, 3) = -ri_t;
  out.d_xi.block<3, 3>(6, 6) = -ri_t * dt;
  out.d_xi.block<3, 3>(6, 9) = -pre.dp_dba;
  out.d_xi.block<3, 3>(6, 12) = -pre.dp_dbg;
  out.d_xj.block<3, 3>(6, 3) = ri_t;

  // Bias difference rows.
  out.d_xi.block<3, 3>(9, 9) = -Mat3::Identity();
  out.d_xi.block<3, 3>(12, 12) = -Mat3::Identity();
  out.d_xj.block<3, 3>(9, 9) = Mat3::Identity();
  out.d_xj.block<3, 3>(12, 12) = Mat3::Identity();
  return out;
}

Mat15 inertial_sqrt_information(const PreintegratedImu& pre,
                                const NoiseModel& noise) {
  Mat15 cov = Mat15::Zero();
  cov.topLeftCorner<9, 9>() = pre.covariance;
  const double dt = pre.dt_total;
  cov.block<3, 3>(9, 9) = Mat3::Identity() *
      (noise.accel_bias_random_walk * noise.accel_bias_random_walk * dt);
  cov.block<3, 3>(12, 12) = Mat3::Identity() *
      (noise.gyro_bias_random_walk * noise.gyro_bias_random_walk * dt);

  const double jitter = 1e-15 * cov.diagonal().mean() + 1e-30;
  cov.diagonal().array() += jitter;

  Eigen::LLT<Mat15> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("IMU covariance is not positive definite");
  }
  // L^-1 whitens: ||L^-1 r||^2 = r^T Sigma^-1 r.
  Mat15 identity = Mat15::Identity();
  return llt.matrixL().solve(identity);
}

Vec6 bias_prior_residual(const KeyframeState& x0, const Vec3& prior_ba,
                         const Vec3& prior_bg) {
  Vec6 r;
  r.head<3>() = x0.ba - prior_ba;
  r.tail<3>() = x0.bg - prior_bg;
  return r;
}

}  // namespace vinit
