#pragma once

// SO(3)/SE(3) primitives used throughout the estimator.
//
// Conventions:
//   * Exp/Log are the vectorized exponential and logarithm of SO(3).
//   * Perturbations are applied on the right: R <- R * Exp(dphi).
//   * Pose tangent vectors are ordered (rotation, translation) and are applied
//     with the retraction (R * Exp(dphi), p + R * dp).

#include <cstdint>
#include <random>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace legged {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Angles below this use truncated Taylor series in the closed forms.
inline constexpr double kSmallAngle = 1e-6;

/// Element of SO(3). Construction does not re-check orthogonality; use
/// is_valid() when the source is untrusted.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m) : m_(m) {}

  static Rotation identity() { return Rotation(); }
  static Rotation about_x(double angle);
  static Rotation about_y(double angle);
  static Rotation about_z(double angle);

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose()); }

  Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// ||R R^T - I||_F.
  double orthogonality_defect() const;
  bool is_valid(double tol = 1e-9) const;

  /// Nearest orthogonal matrix (polar projection).
  Rotation orthonormalized() const;
  /// Projects only when the orthogonality defect exceeds 1e-9.
  Rotation normalized_if_needed() const;

 private:
  Mat3 m_;
};

struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  Pose compose(const Pose& other) const {
    return {rotation * other.rotation, translation + rotation * other.translation};
  }
  Pose inverse() const {
    Rotation rt = rotation.inverse();
    return {rt, -(rt * translation)};
  }
};

Mat3 hat(const Vec3& w);
Vec3 vee(const Mat3& m);

Rotation exp_so3(const Vec3& phi);

/// Throws Error(AngleAtPi) when trace(R) <= -1 + 1e-9.
Vec3 log_so3(const Rotation& r);

Mat3 right_jacobian(const Vec3& phi);
Mat3 right_jacobian_inverse(const Vec3& phi);

/// (R * Exp(delta.head<3>()), p + R * delta.tail<3>()).
Pose retract_pose(const Pose& pose, const Vec6& delta);

/// Symmetric square root factor L with L L^T = sigma; tolerates PSD input.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sigma);

/// Draws eps ~ N(0, sigma) and returns Exp(eps).
Rotation sample_rotation_noise(const Mat3& sigma, std::mt19937_64& rng);
Rotation sample_rotation_noise(const Mat3& sigma, std::uint64_t seed);

/// Draws a zero-mean Gaussian vector with the given covariance.
Eigen::VectorXd sample_gaussian(const Eigen::MatrixXd& sigma, std::mt19937_64& rng);

}  // namespace legged
