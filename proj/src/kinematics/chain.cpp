#include "legged/error.hpp"
#include "legged/kinematics.hpp"

namespace legged {

Vec3 axis_vector(JointAxis axis) {
  switch (axis) {
    case JointAxis::X: return Vec3::UnitX();
    case JointAxis::Y: return Vec3::UnitY();
    case JointAxis::Z: return Vec3::UnitZ();
  }
  return Vec3::Zero();
}

Vec3 dagger(JointAxis axis, double angle) { return angle * axis_vector(axis); }

KinematicChain::KinematicChain(std::vector<LinkParam> links) : links_(std::move(links)) {
  if (links_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "a chain needs at least one joint and a terminal link");
  }
  for (std::size_t n = 0; n + 1 < links_.size(); ++n) {
    if (!links_[n].axis) {
      throw Error(ErrorCode::InvalidArgument, "link " + std::to_string(n + 1) + " lacks a joint axis");
    }
  }
  if (links_.back().axis) {
    throw Error(ErrorCode::InvalidArgument, "terminal link must be fixed");
  }
}

}  // namespace legged
