#pragma once

// Random-instance generators and comparison helpers shared by the test suites.

#include <cmath>
#include <random>

#include <Eigen/Core>

#include "legged/graph/factors.hpp"
#include "legged/graph/values.hpp"
#include "legged/kinematics.hpp"
#include "legged/manifold.hpp"

namespace legged::testing {

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng), n(rng)};
}

/// Rotation vector with norm uniform in [0, max_angle].
inline Vec3 random_tangent(std::mt19937_64& rng, double max_angle) {
  Vec3 axis = random_vec(rng);
  while (axis.norm() < 1e-6) axis = random_vec(rng);
  std::uniform_real_distribution<double> u(0.0, max_angle);
  return axis.normalized() * u(rng);
}

inline Rotation random_rotation(std::mt19937_64& rng) {
  return exp_so3(random_tangent(rng, 3.0));
}

inline NavState random_state(std::mt19937_64& rng, bool foot0, bool foot1) {
  NavState s;
  s.R = random_rotation(rng);
  s.p = random_vec(rng, 2.0);
  s.v = random_vec(rng);
  s.bias.gyro = random_vec(rng, 0.01);
  s.bias.accel = random_vec(rng, 0.1);
  if (foot0) s.contacts[0] = ContactState{random_rotation(rng), random_vec(rng, 2.0)};
  if (foot1) s.contacts[1] = ContactState{random_rotation(rng), random_vec(rng, 2.0)};
  return s;
}

/// Chain with n_links links (n_links - 1 joints), random axes and offsets.
inline KinematicChain random_chain(std::mt19937_64& rng, std::size_t n_links) {
  std::uniform_int_distribution<int> axis(0, 2);
  std::vector<LinkParam> links(n_links);
  for (std::size_t k = 0; k < n_links; ++k) {
    links[k].rotation = random_rotation(rng);
    links[k].translation = random_vec(rng, 0.3);
    if (k + 1 < n_links) links[k].axis = static_cast<JointAxis>(axis(rng));
  }
  return KinematicChain(links);
}

inline Eigen::VectorXd random_angles(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd a(n);
  for (Eigen::Index k = 0; k < n; ++k) a(k) = u(rng);
  return a;
}

/// ||a - b|| / max(||b||, floor); a relative measure that stays sane near zero.
inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor = 1.0) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

/// Sample covariance of (Log(fk_R^T fk_R'), fk_p' - fk_p) under i.i.d. encoder noise.
inline Mat6 monte_carlo_fk_covariance(const KinematicChain& chain, const Eigen::VectorXd& a, double sigma, int n,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const FkPose base = forward_kinematics(chain, a);
  Mat6 acc = Mat6::Zero();
  for (int s = 0; s < n; ++s) {
    Eigen::VectorXd eta(a.size());
    for (Eigen::Index k = 0; k < a.size(); ++k) eta(k) = noise(rng);
    const FkPose moved = forward_kinematics(chain, a + eta);
    Vec6 e;
    e << log_so3(base.rotation.inverse() * moved.rotation), moved.position - base.position;
    acc += e * e.transpose();
  }
  return acc / n;
}

inline ImuDelta random_imu_delta(std::mt19937_64& rng) {
  ImuNoise noise{0.0014, 0.0307, 0.0005, 0.005};
  ImuBias lin{random_vec(rng, 0.01), random_vec(rng, 0.1)};
  ImuPreintegrator pre(lin, noise);
  for (int k = 0; k < 40; ++k) pre.integrate(random_vec(rng, 0.5), random_vec(rng, 2.0) + Vec3(0, 0, 9.81), 0.005);
  return pre.delta();
}

inline Mat6 random_spd6(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat6 a;
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = n(rng);
  return a * a.transpose() + 0.1 * Mat6::Identity();
}

// One instance of every factor family over two random nodes that both carry
// contacts for both feet.
inline std::vector<FactorPtr> every_factor(std::mt19937_64& rng) {
  std::vector<FactorPtr> out;
  Eigen::Matrix<double, 15, 15> prior_cov = Eigen::Matrix<double, 15, 15>::Identity() * 0.01;
  PriorMean mean{random_rotation(rng), random_vec(rng), random_vec(rng), {random_vec(rng, 0.01), random_vec(rng, 0.1)}};
  out.push_back(std::make_shared<PriorFactor>(0, mean, prior_cov));

  RelativePoseMeasurement lc{0, 1, Pose{random_rotation(rng), random_vec(rng)}, random_spd6(rng)};
  out.push_back(std::make_shared<RelativePoseFactor>(lc));
  out.push_back(std::make_shared<ImuFactor>(0, 1, random_imu_delta(rng)));
  out.push_back(std::make_shared<BiasRandomWalkFactor>(0, 1, Mat6::Identity() * 1e-4));
  out.push_back(std::make_shared<ForwardKinematicFactor>(1, 1, FkPose{random_rotation(rng), random_vec(rng)},
                                                         random_spd6(rng)));

  ContactDelta rigid = rigid_contact_preintegrate(0.0, 0.3, Mat3::Identity() * 0.0025, Mat3::Identity() * 0.01);
  rigid.delta_C = random_rotation(rng);  // exercise the general residual
  rigid.delta_d = random_vec(rng, 0.1);
  out.push_back(std::make_shared<RigidContactFactor>(0, 1, 0, rigid));

  ContactDelta point;
  point.kind = ContactKind::Point;
  point.t_j = 0.3;
  point.delta_d = random_vec(rng, 0.1);
  point.covariance = Eigen::Matrix3d::Identity() * 0.01;
  out.push_back(std::make_shared<PointContactFactor>(0, 1, 1, point));
  return out;
}

}  // namespace legged::testing
