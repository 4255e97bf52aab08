#include "legged/kinematics.hpp"

namespace legged {

KinematicChain planar_demo_chain() {
  return KinematicChain({
      {Rotation::identity(), Vec3(0.0, 0.1, 0.0), JointAxis::Y},    // hip pitch
      {Rotation::identity(), Vec3(0.0, 0.0, -0.45), JointAxis::Y},  // knee
      {Rotation::identity(), Vec3(0.0, 0.0, -0.45), std::nullopt},  // shank to ankle
  });
}

KinematicChain spatial_leg_chain(double lateral_offset) {
  return KinematicChain({
      {Rotation::identity(), Vec3(0.0, lateral_offset, -0.05), JointAxis::Z},  // hip yaw
      {Rotation::identity(), Vec3::Zero(), JointAxis::X},                      // hip roll
      {Rotation::identity(), Vec3::Zero(), JointAxis::Y},                      // hip pitch
      {Rotation::identity(), Vec3(0.0, 0.0, -0.45), JointAxis::Y},             // knee
      {Rotation::identity(), Vec3(0.0, 0.0, -0.45), JointAxis::Y},             // ankle pitch
      {Rotation::identity(), Vec3::Zero(), JointAxis::X},                      // ankle roll
      {Rotation::identity(), Vec3(0.0, 0.0, -0.05), std::nullopt},             // sole
  });
}

}  // namespace legged
