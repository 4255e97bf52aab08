#include <cmath>
#include <string>

#include "legged/error.hpp"
#include "legged/preintegration.hpp"

namespace legged {

ContactDelta rigid_contact_preintegrate(double t_i, double t_j, const Mat3& sigma_w,
                                        const Mat3& sigma_v) {
  const double dt = t_j - t_i;
  if (!(dt > 0.0)) throw Error(ErrorCode::NonPositiveInterval, "contact interval must be positive");
  ContactDelta out;
  out.kind = ContactKind::Rigid;
  out.t_i = t_i;
  out.t_j = t_j;
  out.covariance = Eigen::MatrixXd::Zero(6, 6);
  out.covariance.topLeftCorner<3, 3>() = sigma_w * dt;
  out.covariance.bottomRightCorner<3, 3>() = sigma_v * dt;
  return out;
}

RigidContactPreintegrator::RigidContactPreintegrator(double t_i, ContactNoiseFn noise)
    : t_i_(t_i), t_(t_i), noise_(std::move(noise)) {}

void RigidContactPreintegrator::integrate(double dt, bool in_contact) {
  if (!in_contact) throw Error(ErrorCode::BrokenContact, "contact lost inside the interval");
  if (!(dt > 0.0)) throw Error(ErrorCode::NonPositiveInterval, "sample interval must be positive");
  const auto [sigma_w, sigma_v] = noise_(t_);
  // Discrete noise has covariance Sigma / dt and enters scaled by dt.
  covariance_.topLeftCorner<3, 3>() += (sigma_w / dt) * dt * dt;
  covariance_.bottomRightCorner<3, 3>() += (sigma_v / dt) * dt * dt;
  t_ += dt;
}

ContactDelta RigidContactPreintegrator::delta() const {
  if (!(t_ > t_i_)) throw Error(ErrorCode::NonPositiveInterval, "no samples integrated");
  ContactDelta out;
  out.kind = ContactKind::Rigid;
  out.t_i = t_i_;
  out.t_j = t_;
  out.covariance = covariance_;
  return out;
}

ContactDelta rigid_contact_preintegrate(double t_i, std::span<const double> dt_samples,
                                        const Mat3& sigma_w, const Mat3& sigma_v) {
  RigidContactPreintegrator pre(t_i, [&](double) { return std::make_pair(sigma_w, sigma_v); });
  for (double dt : dt_samples) pre.integrate(dt);
  return pre.delta();
}

std::vector<Mat3> point_contact_noise_maps(const PointContactInputs& inputs,
                                           const KinematicChain& chain, const Rotation& contact_i,
                                           const Rotation& base_i, const ImuBias& bias_lin) {
  const auto& imu = inputs.imu;
  const auto& enc = inputs.encoders;
  if (imu.empty()) throw Error(ErrorCode::EmptyStream, "no samples in contact interval");
  if (enc.size() != imu.size()) {
    throw Error(ErrorCode::DimensionMismatch, "encoder stream not aligned with gyro stream");
  }

  std::vector<Mat3> maps;
  maps.reserve(imu.size());
  Mat3 delta_R = Mat3::Identity();  // dR_ik
  for (std::size_t k = 0; k < imu.size(); ++k) {
    if (std::abs(enc[k].timestamp - imu[k].timestamp) > 1e-9) {
      throw Error(ErrorCode::DimensionMismatch,
                  "encoder timestamp mismatch at sample " + std::to_string(k));
    }
    const double next = k + 1 < imu.size() ? imu[k + 1].timestamp : inputs.t_end;
    const double dt = next - imu[k].timestamp;
    if (!(dt > 0.0)) throw Error(ErrorCode::NonMonotoneTime, "sample " + std::to_string(k));

    if (k == 0) {
      // The encoders at t_i already feed the FK factor, so the state estimate stands in.
      maps.push_back(base_i.matrix().transpose() * contact_i.matrix() * dt);
    } else {
      const Rotation fk_R = forward_kinematics(chain, enc[k].angles).rotation;
      maps.push_back(delta_R * fk_R.matrix() * dt);
    }
    delta_R = delta_R * exp_so3((imu[k].gyro - bias_lin.gyro) * dt).matrix();
  }
  return maps;
}

ContactDelta point_contact_preintegrate(const PointContactInputs& inputs,
                                        const KinematicChain& chain, const Rotation& contact_i,
                                        const Rotation& base_i, const ImuBias& bias_lin,
                                        const Mat3& sigma_vd, std::span<const bool> in_contact) {
  if (!in_contact.empty()) {
    if (in_contact.size() != inputs.imu.size()) {
      throw Error(ErrorCode::DimensionMismatch, "contact flags not aligned with samples");
    }
    for (bool c : in_contact) {
      if (!c) throw Error(ErrorCode::BrokenContact, "contact lost inside the interval");
    }
  }
  const std::vector<Mat3> maps = point_contact_noise_maps(inputs, chain, contact_i, base_i, bias_lin);

  ContactDelta out;
  out.kind = ContactKind::Point;
  out.t_i = inputs.imu.front().timestamp;
  out.t_j = inputs.t_end;
  Mat3 cov = Mat3::Zero();
  for (const Mat3& b : maps) cov += b * sigma_vd * b.transpose();
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

Vec6 rigid_contact_residual(const Rotation& c_i, const Vec3& d_i, const Rotation& c_j,
                            const Vec3& d_j) {
  Vec6 r;
  r.head<3>() = log_so3(c_i.inverse() * c_j);
  r.tail<3>() = c_i.matrix().transpose() * (d_j - d_i);
  return r;
}

Vec3 point_contact_residual(const Rotation& r_i, const Vec3& d_i, const Vec3& d_j) {
  return r_i.matrix().transpose() * (d_j - d_i);
}

}  // namespace legged
