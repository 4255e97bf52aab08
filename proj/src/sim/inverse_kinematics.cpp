#include <Eigen/QR>

#include "legged/error.hpp"
#include "legged/sim.hpp"

namespace legged {

Eigen::VectorXd nominal_leg_angles(const KinematicChain& chain) {
  Eigen::VectorXd angles = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(chain.encoder_count()));
  if (angles.size() == 6) angles << 0.0, 0.0, -0.35, 0.7, -0.35, 0.0;
  return angles;
}

Eigen::VectorXd inverse_kinematics(const KinematicChain& chain, const FkPose& target,
                                   const Eigen::VectorXd& initial_guess) {
  const auto joints = static_cast<Eigen::Index>(chain.encoder_count());
  if (initial_guess.size() != joints) {
    throw Error(ErrorCode::DimensionMismatch, "initial guess length");
  }
  Eigen::VectorXd angles = initial_guess;
  Eigen::MatrixXd jac(6, joints);
  Vec6 err;
  for (int iter = 0; iter < 50; ++iter) {
    const FkPose pose = forward_kinematics(chain, angles);
    err.head<3>() = log_so3(pose.rotation.inverse() * target.rotation);
    err.tail<3>() = target.position - pose.position;
    if (err.norm() < 1e-13) return angles;

    // Joint k perturbs the contact as fk_R Exp(Q_k e_k dk), fk_p + S_k e_k dk.
    const FkNoiseSystem sys = fk_noise_system(chain, angles);
    for (Eigen::Index k = 0; k < joints; ++k) {
      const Vec3 e = axis_vector(*chain.link(static_cast<std::size_t>(k) + 1).axis);
      jac.col(k).head<3>() = sys.rotation.block<3, 3>(0, 3 * k) * e;
      jac.col(k).tail<3>() = sys.position.block<3, 3>(0, 3 * k) * e;
    }
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(err);
    if (!step.allFinite()) break;
    angles += step;
  }
  const FkPose pose = forward_kinematics(chain, angles);
  err.head<3>() = log_so3(pose.rotation.inverse() * target.rotation);
  err.tail<3>() = target.position - pose.position;
  if (err.norm() < 1e-12) return angles;
  throw Error(ErrorCode::InfeasibleChain,
              "foothold unreachable (residual " + std::to_string(err.norm()) + ")");
}

}  // namespace legged
