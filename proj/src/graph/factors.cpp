#include <Eigen/Cholesky>

#include "legged/error.hpp"
#include "legged/graph/factors.hpp"

namespace legged {

std::string_view to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::Prior: return "Prior";
    case FactorKind::RelativePose: return "RelativePose";
    case FactorKind::Imu: return "Imu";
    case FactorKind::ForwardKinematic: return "ForwardKinematic";
    case FactorKind::RigidContact: return "RigidContact";
    case FactorKind::PointContact: return "PointContact";
    case FactorKind::BiasRandomWalk: return "BiasRandomWalk";
  }
  return "Unknown";
}

Factor::Factor(FactorKind kind, std::vector<NodeId> nodes, std::vector<VarKey> keys,
               Eigen::MatrixXd covariance)
    : kind_(kind), nodes_(std::move(nodes)), keys_(std::move(keys)),
      covariance_(std::move(covariance)) {
  if (covariance_.rows() != covariance_.cols() || covariance_.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "factor covariance must be square");
  }
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, covariance_.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::SingularCovariance, "covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (covariance_ + covariance_.transpose()));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularCovariance,
                std::string(to_string(kind_)) + " factor covariance is not positive definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  sqrt_info_ = lower.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(covariance_.rows(), covariance_.cols()));
  if (!sqrt_info_.allFinite()) {
    throw Error(ErrorCode::SingularCovariance, "covariance inverse is not finite");
  }
}

bool Factor::analytic_jacobians(StateRefs, std::vector<Eigen::MatrixXd>&) const { return false; }

Eigen::VectorXd Factor::residual(const GraphValues& values) const {
  std::vector<const NavState*> refs;
  refs.reserve(nodes_.size());
  for (NodeId id : nodes_) refs.push_back(&values.at(id));
  return evaluate(refs);
}

double Factor::cost(const GraphValues& values) const {
  return (sqrt_info_ * residual(values)).squaredNorm();
}

std::vector<Eigen::MatrixXd> numeric_jacobians(const Factor& factor, StateRefs states,
                                               double step) {
  std::vector<NavState> local;
  local.reserve(states.size());
  for (const NavState* s : states) local.push_back(*s);
  std::vector<const NavState*> refs;
  for (const NavState& s : local) refs.push_back(&s);

  std::vector<Eigen::MatrixXd> out;
  out.reserve(factor.keys().size());
  for (const VarKey& key : factor.keys()) {
    const int n = block_dim(key.block);
    Eigen::MatrixXd jac(factor.dim(), n);
    for (int c = 0; c < n; ++c) {
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
      delta(c) = step;
      NavState& target = local[key.slot];
      const NavState saved = target;
      retract_block(target, key.block, key.foot, delta);
      const Eigen::VectorXd plus = factor.evaluate(refs);
      target = saved;
      retract_block(target, key.block, key.foot, -delta);
      const Eigen::VectorXd minus = factor.evaluate(refs);
      target = saved;
      jac.col(c) = (plus - minus) / (2.0 * step);
    }
    out.push_back(std::move(jac));
  }
  return out;
}

std::vector<Eigen::MatrixXd> factor_jacobians(const Factor& factor, StateRefs states,
                                              JacobianMode mode) {
  if (mode == JacobianMode::Analytic) {
    std::vector<Eigen::MatrixXd> out;
    if (factor.analytic_jacobians(states, out)) return out;
  }
  return numeric_jacobians(factor, states);
}

// ---------------------------------------------------------------------------

Vec6 relative_pose_residual(const NavState& s_i, const NavState& s_j, const Pose& measured) {
  const Mat3 rel = s_i.R.matrix().transpose() * s_j.R.matrix();
  Vec6 r;
  r.head<3>() = log_so3(Rotation(measured.rotation.matrix().transpose() * rel));
  r.tail<3>() = s_i.R.matrix().transpose() * (s_j.p - s_i.p) - measured.translation;
  return r;
}

Vec6 fk_factor_residual(const NavState& state, FootId foot, const FkPose& measured) {
  const ContactState& c = state.contact(foot);
  Vec6 r;
  r.head<3>() = log_so3(
      Rotation(measured.rotation.matrix().transpose() * state.R.matrix().transpose() * c.C.matrix()));
  r.tail<3>() = state.R.matrix().transpose() * (c.d - state.p) - measured.position;
  return r;
}

Vec9 imu_factor_residual(const NavState& s_i, const NavState& s_j, const ImuDelta& delta,
                         const Vec3& gravity) {
  const auto pre = delta.corrected(s_i.bias);
  const double dt = delta.dt_total;
  const Mat3 Rt = s_i.R.matrix().transpose();
  Vec9 r;
  r.segment<3>(0) = log_so3(Rotation(pre.delta_R.matrix().transpose() * Rt * s_j.R.matrix()));
  r.segment<3>(3) = Rt * (s_j.v - s_i.v - gravity * dt) - pre.delta_v;
  r.segment<3>(6) = Rt * (s_j.p - s_i.p - s_i.v * dt - 0.5 * gravity * dt * dt) - pre.delta_p;
  return r;
}

Eigen::VectorXd contact_factor_residual(const NavState& s_i, const NavState& s_j,
                                        const ContactDelta& delta, FootId foot) {
  const ContactState& ci = s_i.contact(foot);
  const ContactState& cj = s_j.contact(foot);
  if (delta.kind == ContactKind::Rigid) {
    Vec6 r;
    r.head<3>() = log_so3(
        Rotation(delta.delta_C.matrix().transpose() * ci.C.matrix().transpose() * cj.C.matrix()));
    r.tail<3>() = ci.C.matrix().transpose() * (cj.d - ci.d) - delta.delta_d;
    return r;
  }
  return point_contact_residual(s_i.R, ci.d, cj.d) - delta.delta_d;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd zeros(int rows, VarBlock b) { return Eigen::MatrixXd::Zero(rows, block_dim(b)); }

}  // namespace

PriorFactor::PriorFactor(NodeId node, const PriorMean& mean,
                         const Eigen::Matrix<double, 15, 15>& covariance)
    : Factor(FactorKind::Prior, {node},
             {{0, VarBlock::Pose}, {0, VarBlock::Velocity}, {0, VarBlock::Bias}}, covariance),
      mean_(mean) {}

Eigen::VectorXd PriorFactor::evaluate(StateRefs states) const {
  const NavState& s = *states[0];
  Eigen::VectorXd r(15);
  r.segment<3>(0) = log_so3(mean_.R.inverse() * s.R);
  r.segment<3>(3) = mean_.R.matrix().transpose() * (s.p - mean_.p);
  r.segment<3>(6) = s.v - mean_.v;
  r.segment<6>(9) = s.bias.vector() - mean_.bias.vector();
  return r;
}

bool PriorFactor::analytic_jacobians(StateRefs states, std::vector<Eigen::MatrixXd>& out) const {
  const NavState& s = *states[0];
  const Vec3 r_rot = log_so3(mean_.R.inverse() * s.R);
  Eigen::MatrixXd jp = zeros(15, VarBlock::Pose);
  jp.block<3, 3>(0, 0) = right_jacobian_inverse(r_rot);
  jp.block<3, 3>(3, 3) = mean_.R.matrix().transpose() * s.R.matrix();
  Eigen::MatrixXd jv = zeros(15, VarBlock::Velocity);
  jv.block<3, 3>(6, 0).setIdentity();
  Eigen::MatrixXd jb = zeros(15, VarBlock::Bias);
  jb.block<6, 6>(9, 0).setIdentity();
  out = {jp, jv, jb};
  return true;
}

RelativePoseFactor::RelativePoseFactor(const RelativePoseMeasurement& meas)
    : Factor(FactorKind::RelativePose, {meas.i, meas.j}, {{0, VarBlock::Pose}, {1, VarBlock::Pose}},
             meas.covariance),
      measured_(meas.measured) {
  if (meas.j <= meas.i) throw Error(ErrorCode::InvalidArgument, "relative pose needs j > i");
}

Eigen::VectorXd RelativePoseFactor::evaluate(StateRefs states) const {
  return relative_pose_residual(*states[0], *states[1], measured_);
}

bool RelativePoseFactor::analytic_jacobians(StateRefs states,
                                            std::vector<Eigen::MatrixXd>& out) const {
  const NavState& si = *states[0];
  const NavState& sj = *states[1];
  const Mat3 Rit = si.R.matrix().transpose();
  const Mat3 rel = Rit * sj.R.matrix();
  const Vec3 r_rot = log_so3(Rotation(measured_.rotation.matrix().transpose() * rel));
  const Mat3 jr_inv = right_jacobian_inverse(r_rot);

  Eigen::MatrixXd ji = zeros(6, VarBlock::Pose);
  ji.block<3, 3>(0, 0) = -jr_inv * rel.transpose();
  ji.block<3, 3>(3, 0) = hat(Rit * (sj.p - si.p));
  ji.block<3, 3>(3, 3) = -Mat3::Identity();
  Eigen::MatrixXd jj = zeros(6, VarBlock::Pose);
  jj.block<3, 3>(0, 0) = jr_inv;
  jj.block<3, 3>(3, 3) = rel;
  out = {ji, jj};
  return true;
}

ImuFactor::ImuFactor(NodeId i, NodeId j, ImuDelta delta, const Vec3& gravity)
    : Factor(FactorKind::Imu, {i, j},
             {{0, VarBlock::Pose},
              {0, VarBlock::Velocity},
              {0, VarBlock::Bias},
              {1, VarBlock::Pose},
              {1, VarBlock::Velocity}},
             delta.covariance),
      delta_(std::move(delta)),
      gravity_(gravity) {}

Eigen::VectorXd ImuFactor::evaluate(StateRefs states) const {
  return imu_factor_residual(*states[0], *states[1], delta_, gravity_);
}

BiasRandomWalkFactor::BiasRandomWalkFactor(NodeId i, NodeId j, const Mat6& covariance)
    : Factor(FactorKind::BiasRandomWalk, {i, j}, {{0, VarBlock::Bias}, {1, VarBlock::Bias}},
             covariance) {}

Eigen::VectorXd BiasRandomWalkFactor::evaluate(StateRefs states) const {
  return states[1]->bias.vector() - states[0]->bias.vector();
}

bool BiasRandomWalkFactor::analytic_jacobians(StateRefs,
                                              std::vector<Eigen::MatrixXd>& out) const {
  out = {-Eigen::MatrixXd::Identity(6, 6), Eigen::MatrixXd::Identity(6, 6)};
  return true;
}

ForwardKinematicFactor::ForwardKinematicFactor(NodeId node, FootId foot, const FkPose& measured,
                                               const Mat6& covariance)
    : Factor(FactorKind::ForwardKinematic, {node},
             {{0, VarBlock::Pose}, {0, VarBlock::Contact, foot}}, covariance),
      foot_(foot),
      measured_(measured) {}

Eigen::VectorXd ForwardKinematicFactor::evaluate(StateRefs states) const {
  return fk_factor_residual(*states[0], foot_, measured_);
}

bool ForwardKinematicFactor::analytic_jacobians(StateRefs states,
                                                std::vector<Eigen::MatrixXd>& out) const {
  const NavState& s = *states[0];
  const ContactState& c = s.contact(foot_);
  const Mat3 Rt = s.R.matrix().transpose();
  const Mat3 base_to_contact = Rt * c.C.matrix();
  const Vec3 r_rot = log_so3(Rotation(measured_.rotation.matrix().transpose() * base_to_contact));
  const Mat3 jr_inv = right_jacobian_inverse(r_rot);

  Eigen::MatrixXd jpose = zeros(6, VarBlock::Pose);
  jpose.block<3, 3>(0, 0) = -jr_inv * base_to_contact.transpose();
  jpose.block<3, 3>(3, 0) = hat(Rt * (c.d - s.p));
  jpose.block<3, 3>(3, 3) = -Mat3::Identity();
  Eigen::MatrixXd jcontact = zeros(6, VarBlock::Contact);
  jcontact.block<3, 3>(0, 0) = jr_inv;
  jcontact.block<3, 3>(3, 3) = Rt;
  out = {jpose, jcontact};
  return true;
}

RigidContactFactor::RigidContactFactor(NodeId i, NodeId j, FootId foot, ContactDelta delta)
    : Factor(FactorKind::RigidContact, {i, j},
             {{0, VarBlock::Contact, foot}, {1, VarBlock::Contact, foot}}, delta.covariance),
      foot_(foot),
      delta_(std::move(delta)) {
  if (delta_.kind != ContactKind::Rigid) {
    throw Error(ErrorCode::InvalidArgument, "rigid contact factor needs a rigid delta");
  }
}

Eigen::VectorXd RigidContactFactor::evaluate(StateRefs states) const {
  return contact_factor_residual(*states[0], *states[1], delta_, foot_);
}

bool RigidContactFactor::analytic_jacobians(StateRefs states,
                                            std::vector<Eigen::MatrixXd>& out) const {
  const ContactState& ci = states[0]->contact(foot_);
  const ContactState& cj = states[1]->contact(foot_);
  const Mat3 Cit = ci.C.matrix().transpose();
  const Mat3 rel = Cit * cj.C.matrix();
  const Vec3 r_rot = log_so3(Rotation(delta_.delta_C.matrix().transpose() * rel));
  const Mat3 jr_inv = right_jacobian_inverse(r_rot);

  Eigen::MatrixXd ji = zeros(6, VarBlock::Contact);
  ji.block<3, 3>(0, 0) = -jr_inv * rel.transpose();
  ji.block<3, 3>(3, 0) = hat(Cit * (cj.d - ci.d));
  ji.block<3, 3>(3, 3) = -Cit;
  Eigen::MatrixXd jj = zeros(6, VarBlock::Contact);
  jj.block<3, 3>(0, 0) = jr_inv;
  jj.block<3, 3>(3, 3) = Cit;
  out = {ji, jj};
  return true;
}

PointContactFactor::PointContactFactor(NodeId i, NodeId j, FootId foot, ContactDelta delta)
    : Factor(FactorKind::PointContact, {i, j},
             {{0, VarBlock::Pose}, {0, VarBlock::Contact, foot}, {1, VarBlock::Contact, foot}},
             delta.covariance),
      foot_(foot),
      delta_(std::move(delta)) {
  if (delta_.kind != ContactKind::Point) {
    throw Error(ErrorCode::InvalidArgument, "point contact factor needs a point delta");
  }
}

Eigen::VectorXd PointContactFactor::evaluate(StateRefs states) const {
  return contact_factor_residual(*states[0], *states[1], delta_, foot_);
}

bool PointContactFactor::analytic_jacobians(StateRefs states,
                                            std::vector<Eigen::MatrixXd>& out) const {
  const NavState& si = *states[0];
  const ContactState& ci = si.contact(foot_);
  const ContactState& cj = states[1]->contact(foot_);
  const Mat3 Rt = si.R.matrix().transpose();

  Eigen::MatrixXd jpose = zeros(3, VarBlock::Pose);
  jpose.block<3, 3>(0, 0) = hat(Rt * (cj.d - ci.d));
  Eigen::MatrixXd ji = zeros(3, VarBlock::Contact);
  ji.block<3, 3>(0, 3) = -Rt;
  Eigen::MatrixXd jj = zeros(3, VarBlock::Contact);
  jj.block<3, 3>(0, 3) = Rt;
  out = {jpose, ji, jj};
  return true;
}

}  // namespace legged
