#include <cmath>

#include <Eigen/SVD>

#include "legged/error.hpp"
#include "legged/manifold.hpp"

namespace legged {

Rotation Rotation::about_x(double angle) { return exp_so3(Vec3(angle, 0, 0)); }
Rotation Rotation::about_y(double angle) { return exp_so3(Vec3(0, angle, 0)); }
Rotation Rotation::about_z(double angle) { return exp_so3(Vec3(0, 0, angle)); }

double Rotation::orthogonality_defect() const {
  return (m_ * m_.transpose() - Mat3::Identity()).norm();
}

bool Rotation::is_valid(double tol) const {
  return orthogonality_defect() < tol && std::abs(m_.determinant() - 1.0) < tol;
}

Rotation Rotation::orthonormalized() const {
  Eigen::JacobiSVD<Mat3> svd(m_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0) u.col(2) *= -1.0;
  return Rotation(u * v.transpose());
}

Rotation Rotation::normalized_if_needed() const {
  return orthogonality_defect() > 1e-9 ? orthonormalized() : *this;
}

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Rotation exp_so3(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a;  // sin(theta) / theta
  double b;  // (1 - cos(theta)) / theta^2
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 w = hat(phi);
  return Rotation(Mat3::Identity() + a * w + b * w * w);
}

Vec3 log_so3(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double tr = m.trace();
  if (tr <= -1.0 + 1e-9) {
    throw Error(ErrorCode::AngleAtPi, "rotation angle within tolerance of pi");
  }
  const Vec3 axis2 = vee(m - m.transpose());  // 2 sin(theta) * axis
  const double s = 0.5 * axis2.norm();
  const double c = 0.5 * (tr - 1.0);
  const double theta = std::atan2(s, c);
  if (theta < kSmallAngle) {
    return 0.5 * (1.0 + theta * theta / 6.0) * axis2;
  }
  return (theta / (2.0 * std::sin(theta))) * axis2;
}

Mat3 right_jacobian(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  double b;  // (1 - cos) / theta^2
  double c;  // (theta - sin) / theta^3
  if (theta < kSmallAngle) {
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Mat3 w = hat(phi);
  return Mat3::Identity() - b * w + c * w * w;
}

Mat3 right_jacobian_inverse(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  double d;
  if (theta < kSmallAngle) {
    d = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    d = 1.0 / theta2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  const Mat3 w = hat(phi);
  return Mat3::Identity() + 0.5 * w + d * w * w;
}

Pose retract_pose(const Pose& pose, const Vec6& delta) {
  const Vec3 dphi = delta.head<3>();
  const Vec3 dp = delta.tail<3>();
  return {pose.rotation * exp_so3(dphi), pose.translation + pose.rotation * dp};
}

}  // namespace legged
