#pragma once

// Residual families of the smoothing problem. Each factor evaluates an
// unwhitened residual from the states of the nodes it touches; whitening by
// the inverse covariance square root happens in linearize().

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "legged/graph/values.hpp"
#include "legged/kinematics.hpp"
#include "legged/preintegration.hpp"

namespace legged {

enum class FactorKind {
  Prior,
  RelativePose,
  Imu,
  ForwardKinematic,
  RigidContact,
  PointContact,
  BiasRandomWalk,
};

std::string_view to_string(FactorKind kind);

/// How block Jacobians are obtained.
enum class JacobianMode {
  Analytic,  // closed form where the factor provides one, central differences otherwise
  Numeric,   // central differences for every factor
};

using StateRefs = std::span<const NavState* const>;

class Factor {
 public:
  /// Throws SingularCovariance unless the covariance is symmetric positive definite.
  Factor(FactorKind kind, std::vector<NodeId> nodes, std::vector<VarKey> keys,
         Eigen::MatrixXd covariance);
  virtual ~Factor() = default;

  FactorKind kind() const { return kind_; }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<VarKey>& keys() const { return keys_; }
  int dim() const { return static_cast<int>(covariance_.rows()); }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  /// W with W^T W = covariance^{-1}.
  const Eigen::MatrixXd& sqrt_information() const { return sqrt_info_; }

  /// states[s] is the state of nodes()[s].
  virtual Eigen::VectorXd evaluate(StateRefs states) const = 0;

  /// Fills one (dim x block_dim) matrix per key; returns false when the factor
  /// has no closed form.
  virtual bool analytic_jacobians(StateRefs states, std::vector<Eigen::MatrixXd>& out) const;

  /// Convenience overload resolving node ids against values.
  Eigen::VectorXd residual(const GraphValues& values) const;
  /// ||W r||^2.
  double cost(const GraphValues& values) const;

 private:
  FactorKind kind_;
  std::vector<NodeId> nodes_;
  std::vector<VarKey> keys_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd sqrt_info_;
};

using FactorPtr = std::shared_ptr<const Factor>;

/// Central-difference Jacobians through retract_block.
std::vector<Eigen::MatrixXd> numeric_jacobians(const Factor& factor, StateRefs states,
                                               double step = 1e-6);

/// Jacobians according to the mode.
std::vector<Eigen::MatrixXd> factor_jacobians(const Factor& factor, StateRefs states,
                                              JacobianMode mode);

// ---------------------------------------------------------------------------
// Residual functions

struct RelativePoseMeasurement {
  NodeId i = 0;
  NodeId j = 0;
  Pose measured;
  Mat6 covariance = Mat6::Identity();
};

/// vec(Log(R~^T R_i^T R_j), R_i^T (p_j - p_i) - p~).
Vec6 relative_pose_residual(const NavState& s_i, const NavState& s_j, const Pose& measured);

/// vec(Log(fk_R^T R^T C), R^T (d - p) - fk_p) for one foot.
Vec6 fk_factor_residual(const NavState& state, FootId foot, const FkPose& measured);

/// Bias-corrected on-manifold IMU residual (rotation, velocity, position).
Vec9 imu_factor_residual(const NavState& s_i, const NavState& s_j, const ImuDelta& delta,
                         const Vec3& gravity = kGravity);

/// Rigid: 6-vector; point: 3-vector. Throws MissingContactState.
Eigen::VectorXd contact_factor_residual(const NavState& s_i, const NavState& s_j,
                                        const ContactDelta& delta, FootId foot);

// ---------------------------------------------------------------------------
// Factor types

struct PriorMean {
  Rotation R;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  ImuBias bias;
};

/// Anchor on (R, p, v, bias) of one node; 15-dimensional.
class PriorFactor final : public Factor {
 public:
  PriorFactor(NodeId node, const PriorMean& mean, const Eigen::Matrix<double, 15, 15>& covariance);
  Eigen::VectorXd evaluate(StateRefs states) const override;
  bool analytic_jacobians(StateRefs states, std::vector<Eigen::MatrixXd>& out) const override;
  const PriorMean& mean() const { return mean_; }

 private:
  PriorMean mean_;
};

class RelativePoseFactor final : public Factor {
 public:
  explicit RelativePoseFactor(const RelativePoseMeasurement& meas);
  Eigen::VectorXd evaluate(StateRefs states) const override;
  bool analytic_jacobians(StateRefs states, std::vector<Eigen::MatrixXd>& out) const override;

 private:
  Pose measured_;
};

/// Keys: pose_i, velocity_i, bias_i, pose_j, velocity_j. Jacobians are numeric.
class ImuFactor final : public Factor {
 public:
  ImuFactor(NodeId i, NodeId j, ImuDelta delta, const Vec3& gravity = kGravity);
  Eigen::VectorXd evaluate(StateRefs states) const override;
  const ImuDelta& delta() const { return delta_; }

 private:
  ImuDelta delta_;
  Vec3 gravity_;
};

/// b_j - b_i with covariance blkdiag(sg^2, sa^2) * dt.
class BiasRandomWalkFactor final : public Factor {
 public:
  BiasRandomWalkFactor(NodeId i, NodeId j, const Mat6& covariance);
  Eigen::VectorXd evaluate(StateRefs states) const override;
  bool analytic_jacobians(StateRefs states, std::vector<Eigen::MatrixXd>& out) const override;
};

/// Unary factor tying the base pose to one foot's contact frame.
class ForwardKinematicFactor final : public Factor {
 public:
  ForwardKinematicFactor(NodeId node, FootId foot, const FkPose& measured, const Mat6& covariance);
  Eigen::VectorXd evaluate(StateRefs states) const override;
  bool analytic_jacobians(StateRefs states, std::vector<Eigen::MatrixXd>& out) const override;

 private:
  FootId foot_;
  FkPose measured_;
};

/// Keys: contact_i, contact_j.
class RigidContactFactor final : public Factor {
 public:
  RigidContactFactor(NodeId i, NodeId j, FootId foot, ContactDelta delta);
  Eigen::VectorXd evaluate(StateRefs states) const override;
  bool analytic_jacobians(StateRefs states, std::vector<Eigen::MatrixXd>& out) const override;

 private:
  FootId foot_;
  ContactDelta delta_;
};

/// Keys: pose_i, contact_i, contact_j. Only d enters the residual.
class PointContactFactor final : public Factor {
 public:
  PointContactFactor(NodeId i, NodeId j, FootId foot, ContactDelta delta);
  Eigen::VectorXd evaluate(StateRefs states) const override;
  bool analytic_jacobians(StateRefs states, std::vector<Eigen::MatrixXd>& out) const override;

 private:
  FootId foot_;
  ContactDelta delta_;
};

}  // namespace legged
