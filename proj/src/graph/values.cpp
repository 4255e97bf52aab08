#include "legged/error.hpp"
#include "legged/graph/values.hpp"

namespace legged {

int NavState::contact_count() const {
  int n = 0;
  for (const auto& c : contacts) n += c.has_value() ? 1 : 0;
  return n;
}

const ContactState& NavState::contact(FootId foot) const {
  if (foot < 0 || foot >= kMaxFeet || !contacts[static_cast<std::size_t>(foot)]) {
    throw Error(ErrorCode::MissingContactState, "foot " + std::to_string(foot) + " not in contact");
  }
  return *contacts[static_cast<std::size_t>(foot)];
}

std::size_t block_offset(const NavState& state, VarBlock block, FootId foot) {
  switch (block) {
    case VarBlock::Pose: return 0;
    case VarBlock::Velocity: return 6;
    case VarBlock::Bias: return 9;
    case VarBlock::Contact: {
      state.contact(foot);
      std::size_t off = 15;
      for (FootId f = 0; f < foot; ++f) {
        if (state.contacts[static_cast<std::size_t>(f)]) off += 6;
      }
      return off;
    }
  }
  return 0;
}

void retract_block(NavState& state, VarBlock block, FootId foot,
                   const Eigen::Ref<const Eigen::VectorXd>& delta) {
  switch (block) {
    case VarBlock::Pose: {
      const Pose moved = retract_pose({state.R, state.p}, delta.head<6>());
      state.R = moved.rotation;
      state.p = moved.translation;
      break;
    }
    case VarBlock::Velocity:
      state.v += delta.head<3>();
      break;
    case VarBlock::Bias:
      state.bias.gyro += delta.head<3>();
      state.bias.accel += delta.segment<3>(3);
      break;
    case VarBlock::Contact: {
      state.contact(foot);
      auto& c = *state.contacts[static_cast<std::size_t>(foot)];
      c.C = c.C * exp_so3(delta.head<3>());
      c.d += delta.segment<3>(3);
      break;
    }
  }
}

NodeId GraphValues::add_node(double timestamp, NavState initial) {
  if (!states_.empty() && !(timestamp > states_.back().timestamp)) {
    throw Error(ErrorCode::NonMonotoneTime, "node timestamps must strictly increase");
  }
  initial.timestamp = timestamp;
  states_.push_back(std::move(initial));
  offsets_valid_ = false;
  return states_.size() - 1;
}

void GraphValues::refresh_offsets() const {
  if (offsets_valid_) return;
  offsets_.assign(states_.size() + 1, 0);
  for (std::size_t i = 0; i < states_.size(); ++i) {
    offsets_[i + 1] = offsets_[i] + states_[i].tangent_dim();
  }
  offsets_valid_ = true;
}

std::size_t GraphValues::tangent_dim() const {
  refresh_offsets();
  return offsets_.back();
}

std::size_t GraphValues::node_offset(NodeId id) const {
  refresh_offsets();
  return offsets_.at(id);
}

std::size_t GraphValues::column(NodeId id, VarBlock block, FootId foot) const {
  return node_offset(id) + block_offset(states_.at(id), block, foot);
}

GraphValues GraphValues::retract(const Eigen::VectorXd& delta) const {
  if (static_cast<std::size_t>(delta.size()) != tangent_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "tangent increment size");
  }
  GraphValues out = *this;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    NavState& s = out.states_[i];
    const std::size_t base = offsets_[i];
    retract_block(s, VarBlock::Pose, -1, delta.segment(static_cast<Eigen::Index>(base), 6));
    retract_block(s, VarBlock::Velocity, -1, delta.segment(static_cast<Eigen::Index>(base + 6), 3));
    retract_block(s, VarBlock::Bias, -1, delta.segment(static_cast<Eigen::Index>(base + 9), 6));
    std::size_t off = base + 15;
    for (FootId f = 0; f < kMaxFeet; ++f) {
      if (!s.contacts[static_cast<std::size_t>(f)]) continue;
      retract_block(s, VarBlock::Contact, f, delta.segment(static_cast<Eigen::Index>(off), 6));
      off += 6;
    }
  }
  return out;
}

NodeId add_node(GraphValues& values, double timestamp, const NavState& initial) {
  return values.add_node(timestamp, initial);
}

}  // namespace legged
