#include "legged/error.hpp"
#include "legged/preintegration.hpp"

namespace legged {

ImuDelta::Corrected ImuDelta::corrected(const ImuBias& bias) const {
  const Vec3 dbg = bias.gyro - bias_lin.gyro;
  const Vec3 dba = bias.accel - bias_lin.accel;
  return {delta_R * exp_so3(dR_dbg * dbg), delta_v + dv_dbg * dbg + dv_dba * dba,
          delta_p + dp_dbg * dbg + dp_dba * dba};
}

ImuPreintegrator::ImuPreintegrator(const ImuBias& bias_lin, const ImuNoise& noise)
    : noise_(noise) {
  delta_.bias_lin = bias_lin;
}

void ImuPreintegrator::integrate(const Vec3& gyro, const Vec3& accel, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::NonMonotoneTime, "non-positive sample interval");

  const Vec3 w = gyro - delta_.bias_lin.gyro;
  const Vec3 a = accel - delta_.bias_lin.accel;
  const Mat3 dR = exp_so3(w * dt).matrix();
  const Mat3 jr = right_jacobian(w * dt);
  const Mat3 R = delta_.delta_R.matrix();
  const Mat3 a_hat = hat(a);
  const double dt2 = dt * dt;

  // Error state (dphi, dv, dp).
  Mat9 A = Mat9::Identity();
  A.block<3, 3>(0, 0) = dR.transpose();
  A.block<3, 3>(3, 0) = -R * a_hat * dt;
  A.block<3, 3>(6, 0) = -0.5 * R * a_hat * dt2;
  A.block<3, 3>(6, 3) = Mat3::Identity() * dt;

  Eigen::Matrix<double, 9, 3> Bg = Eigen::Matrix<double, 9, 3>::Zero();
  Bg.block<3, 3>(0, 0) = jr * dt;
  Eigen::Matrix<double, 9, 3> Ba = Eigen::Matrix<double, 9, 3>::Zero();
  Ba.block<3, 3>(3, 0) = R * dt;
  Ba.block<3, 3>(6, 0) = 0.5 * R * dt2;

  const double gyro_var = noise_.gyro_sigma * noise_.gyro_sigma / dt;
  const double accel_var = noise_.accel_sigma * noise_.accel_sigma / dt;
  delta_.covariance = A * delta_.covariance * A.transpose() +
                      gyro_var * Bg * Bg.transpose() + accel_var * Ba * Ba.transpose();

  delta_.dp_dba += delta_.dv_dba * dt - 0.5 * R * dt2;
  delta_.dp_dbg += delta_.dv_dbg * dt - 0.5 * R * a_hat * delta_.dR_dbg * dt2;
  delta_.dv_dba += -R * dt;
  delta_.dv_dbg += -R * a_hat * delta_.dR_dbg * dt;
  delta_.dR_dbg = dR.transpose() * delta_.dR_dbg - jr * dt;

  delta_.delta_p += delta_.delta_v * dt + 0.5 * R * a * dt2;
  delta_.delta_v += R * a * dt;
  delta_.delta_R = Rotation(R * dR).normalized_if_needed();
  delta_.dt_total += dt;
}

ImuDelta imu_preintegrate(std::span<const ImuSample> samples, double t_end,
                          const ImuBias& bias_lin, const ImuNoise& noise) {
  if (samples.empty()) throw Error(ErrorCode::EmptyStream, "no IMU samples to integrate");
  ImuPreintegrator pre(bias_lin, noise);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double next = k + 1 < samples.size() ? samples[k + 1].timestamp : t_end;
    if (!(next > samples[k].timestamp)) {
      throw Error(ErrorCode::NonMonotoneTime,
                  "IMU timestamps must increase (sample " + std::to_string(k) + ")");
    }
    pre.integrate(samples[k].gyro, samples[k].accel, next - samples[k].timestamp);
  }
  return pre.delta();
}

ImuDelta compose(const ImuDelta& first, const ImuDelta& second) {
  if ((first.bias_lin.vector() - second.bias_lin.vector()).norm() > 0.0) {
    throw Error(ErrorCode::InvalidArgument, "composed deltas must share the linearization bias");
  }
  const Mat3 R1 = first.delta_R.matrix();
  const Mat3 R2 = second.delta_R.matrix();
  const double dt2 = second.dt_total;

  ImuDelta out;
  out.bias_lin = first.bias_lin;
  out.dt_total = first.dt_total + second.dt_total;
  out.delta_R = Rotation(R1 * R2).normalized_if_needed();
  out.delta_v = first.delta_v + R1 * second.delta_v;
  out.delta_p = first.delta_p + first.delta_v * dt2 + R1 * second.delta_p;

  Mat9 A1 = Mat9::Identity();
  A1.block<3, 3>(0, 0) = R2.transpose();
  A1.block<3, 3>(3, 0) = -R1 * hat(second.delta_v);
  A1.block<3, 3>(6, 0) = -R1 * hat(second.delta_p);
  A1.block<3, 3>(6, 3) = Mat3::Identity() * dt2;
  Mat9 A2 = Mat9::Identity();
  A2.block<3, 3>(3, 3) = R1;
  A2.block<3, 3>(6, 6) = R1;
  out.covariance = A1 * first.covariance * A1.transpose() + A2 * second.covariance * A2.transpose();

  out.dR_dbg = R2.transpose() * first.dR_dbg + second.dR_dbg;
  out.dv_dbg = first.dv_dbg - R1 * hat(second.delta_v) * first.dR_dbg + R1 * second.dv_dbg;
  out.dv_dba = first.dv_dba + R1 * second.dv_dba;
  out.dp_dbg = first.dp_dbg + first.dv_dbg * dt2 - R1 * hat(second.delta_p) * first.dR_dbg +
               R1 * second.dp_dbg;
  out.dp_dba = first.dp_dba + first.dv_dba * dt2 + R1 * second.dp_dba;
  return out;
}

}  // namespace legged
