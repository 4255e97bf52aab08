#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "legged/manifold.hpp"
#include "legged/preintegration.hpp"

namespace legged {

using NodeId = std::size_t;
using FootId = int;

inline constexpr int kMaxFeet = 2;

/// World pose of a foot contact frame.
struct ContactState {
  Rotation C;
  Vec3 d = Vec3::Zero();
};

/// Per-node estimator state: base orientation, position, velocity, IMU bias,
/// and the contact frame of each foot that touches the ground at this node.
struct NavState {
  double timestamp = 0.0;
  Rotation R;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  ImuBias bias;
  std::array<std::optional<ContactState>, kMaxFeet> contacts;

  int contact_count() const;
  /// 9 (R, p, v) + 6 (bias) + 6 per foot in contact.
  std::size_t tangent_dim() const { return 15 + 6 * static_cast<std::size_t>(contact_count()); }
  const ContactState& contact(FootId foot) const;  // throws MissingContactState
};

/// Tangent blocks of a node, in storage order.
enum class VarBlock { Pose, Velocity, Bias, Contact };

constexpr int block_dim(VarBlock b) { return b == VarBlock::Velocity ? 3 : 6; }

/// A variable block referenced by a factor; slot indexes the factor's node list.
struct VarKey {
  std::size_t slot = 0;
  VarBlock block = VarBlock::Pose;
  FootId foot = -1;
};

/// Applies a tangent increment to one block: pose uses (R Exp(dphi), p + R dp),
/// contacts use (C Exp(dtheta), d + dd), velocity and bias are additive.
void retract_block(NavState& state, VarBlock block, FootId foot,
                   const Eigen::Ref<const Eigen::VectorXd>& delta);

/// Offset of a block inside its node's tangent vector.
std::size_t block_offset(const NavState& state, VarBlock block, FootId foot);

class GraphValues {
 public:
  /// Throws NonMonotoneTime unless timestamp is strictly after the last node.
  NodeId add_node(double timestamp, NavState initial);

  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  const NavState& at(NodeId id) const { return states_.at(id); }
  NavState& at(NodeId id) { return states_.at(id); }
  const std::vector<NavState>& states() const { return states_; }

  /// Sum of node tangent dimensions.
  std::size_t tangent_dim() const;
  /// Column offset of a node's tangent block in the stacked ordering.
  std::size_t node_offset(NodeId id) const;
  std::size_t column(NodeId id, VarBlock block, FootId foot) const;

  GraphValues retract(const Eigen::VectorXd& delta) const;

 private:
  void refresh_offsets() const;

  std::vector<NavState> states_;
  mutable std::vector<std::size_t> offsets_;
  mutable bool offsets_valid_ = false;
};

/// Free-function form used by graph builders.
NodeId add_node(GraphValues& values, double timestamp, const NavState& initial);

}  // namespace legged
