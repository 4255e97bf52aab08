#pragma once

// Serial kinematic chains with revolute joints about coordinate axes.
//
// A chain of N links connects the base frame (frame 1) to the contact frame
// (frame N+1). Link n < N contributes the transform
//     H_{n,n+1}(a_n) = [ A_n Exp(dagger(a_n)) | t_n ]
// and the last link is the fixed transform [ A_N | t_N ]. Link and frame
// indices in this API are 1-based to match that layout.

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "legged/manifold.hpp"

namespace legged {

enum class JointAxis { X, Y, Z };

Vec3 axis_vector(JointAxis axis);

/// Embeds a scalar joint angle along the joint axis.
Vec3 dagger(JointAxis axis, double angle);

struct LinkParam {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  std::optional<JointAxis> axis;  // empty only for the terminal fixed link
};

class KinematicChain {
 public:
  /// Throws Error(InvalidArgument) unless at least two links are given, every
  /// link but the last has an axis, and the last has none.
  explicit KinematicChain(std::vector<LinkParam> links);

  std::size_t link_count() const { return links_.size(); }
  std::size_t encoder_count() const { return links_.size() - 1; }
  const LinkParam& link(std::size_t n) const { return links_.at(n - 1); }
  const std::vector<LinkParam>& links() const { return links_; }

 private:
  std::vector<LinkParam> links_;
};

struct EncoderReading {
  double timestamp = 0.0;
  Eigen::VectorXd angles;
};

struct FkPose {
  Rotation rotation;
  Vec3 position = Vec3::Zero();
};

/// Linear map from stacked dagger encoder noise to (dfk_R, dfk_p).
struct FkNoiseSystem {
  Eigen::MatrixXd rotation;  // Q, 3 x 3(N-1)
  Eigen::MatrixXd position;  // S, 3 x 3(N-1)
};

struct FkResult {
  FkPose pose;
  FkNoiseSystem noise;
  Mat6 covariance = Mat6::Zero();  // over (dfk_R, dfk_p)
};

/// Contact pose relative to the base using the summed form
/// fk_p = sum_n A_{1n} t_n. Throws DimensionMismatch.
FkPose forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& angles);

/// Same pose by multiplying the 4x4 homogeneous link transforms.
Eigen::Matrix4d forward_kinematics_product(const KinematicChain& chain,
                                           const Eigen::VectorXd& angles);

/// A_ij for 1 <= i <= j <= N+1. Throws IndexOutOfRange / DimensionMismatch.
Rotation relative_rotation(const KinematicChain& chain, const Eigen::VectorXd& angles,
                           std::size_t i, std::size_t j);

/// A_ij(a + b) evaluated in factored form A_ij(a) * prod_k Exp(A_{k+1,j}(a)^T dagger(b_k)).
Rotation offset_rotation(const KinematicChain& chain, const Eigen::VectorXd& angles,
                         const Eigen::VectorXd& offsets, std::size_t i, std::size_t j);

FkNoiseSystem fk_noise_system(const KinematicChain& chain, const Eigen::VectorXd& angles);

/// Covariance of the dagger-embedded encoder noise: block k is sigma_k^2 e_k e_k^T.
Eigen::MatrixXd dagger_noise_covariance(const KinematicChain& chain,
                                        const Eigen::VectorXd& encoder_sigma);

/// [Q; S] Sigma_dagger [Q; S]^T. Throws NegativeSigma / DimensionMismatch.
Mat6 fk_covariance(const KinematicChain& chain, const Eigen::VectorXd& angles,
                   const Eigen::VectorXd& encoder_sigma);

/// Pose, noise system, and covariance in one pass.
FkResult evaluate_fk(const KinematicChain& chain, const Eigen::VectorXd& angles,
                     const Eigen::VectorXd& encoder_sigma);

/// 3-link planar leg: hip pitch and knee about Y, then a fixed shank-to-ankle block.
KinematicChain planar_demo_chain();

/// 7-link spatial leg (hip yaw/roll/pitch, knee, ankle pitch/roll, fixed sole
/// offset). lateral_offset places the hip along base y.
KinematicChain spatial_leg_chain(double lateral_offset);

}  // namespace legged
