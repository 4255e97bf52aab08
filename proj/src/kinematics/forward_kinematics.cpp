#include <string>

#include "legged/error.hpp"
#include "legged/kinematics.hpp"

namespace legged {
namespace {

void check_angles(const KinematicChain& chain, const Eigen::VectorXd& angles) {
  if (static_cast<std::size_t>(angles.size()) != chain.encoder_count()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(chain.encoder_count()) + " encoder angles, got " +
                    std::to_string(angles.size()));
  }
}

// Rotation of link n (1-based): A_n Exp(dagger(a_n)), or A_N for the terminal link.
Rotation link_rotation(const KinematicChain& chain, const Eigen::VectorXd& angles, std::size_t n) {
  const LinkParam& link = chain.link(n);
  if (!link.axis) return link.rotation;
  return link.rotation * exp_so3(dagger(*link.axis, angles(static_cast<Eigen::Index>(n - 1))));
}

// prefix[n] = A_{1n} for n = 1..N+1 (index 0 unused).
std::vector<Rotation> prefix_rotations(const KinematicChain& chain, const Eigen::VectorXd& angles) {
  const std::size_t n_links = chain.link_count();
  std::vector<Rotation> prefix(n_links + 2);
  prefix[1] = Rotation::identity();
  for (std::size_t n = 1; n <= n_links; ++n) {
    prefix[n + 1] = prefix[n] * link_rotation(chain, angles, n);
  }
  return prefix;
}

}  // namespace

FkPose forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& angles) {
  check_angles(chain, angles);
  const auto prefix = prefix_rotations(chain, angles);
  const std::size_t n_links = chain.link_count();
  FkPose out;
  for (std::size_t n = 1; n <= n_links; ++n) {
    out.position += prefix[n] * chain.link(n).translation;
  }
  out.rotation = prefix[n_links + 1];
  return out;
}

Eigen::Matrix4d forward_kinematics_product(const KinematicChain& chain,
                                           const Eigen::VectorXd& angles) {
  check_angles(chain, angles);
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  for (std::size_t n = 1; n <= chain.link_count(); ++n) {
    Eigen::Matrix4d link = Eigen::Matrix4d::Identity();
    link.topLeftCorner<3, 3>() = link_rotation(chain, angles, n).matrix();
    link.topRightCorner<3, 1>() = chain.link(n).translation;
    h = h * link;
  }
  return h;
}

Rotation relative_rotation(const KinematicChain& chain, const Eigen::VectorXd& angles,
                           std::size_t i, std::size_t j) {
  check_angles(chain, angles);
  const std::size_t last_frame = chain.link_count() + 1;
  if (i < 1 || j < i || j > last_frame) {
    throw Error(ErrorCode::IndexOutOfRange,
                "frame pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  Rotation out;
  for (std::size_t k = i; k < j; ++k) out = out * link_rotation(chain, angles, k);
  return out;
}

Rotation offset_rotation(const KinematicChain& chain, const Eigen::VectorXd& angles,
                         const Eigen::VectorXd& offsets, std::size_t i, std::size_t j) {
  if (static_cast<std::size_t>(offsets.size()) != chain.encoder_count()) {
    throw Error(ErrorCode::DimensionMismatch, "offset vector length");
  }
  Rotation out = relative_rotation(chain, angles, i, j);
  for (std::size_t k = i; k < j; ++k) {
    const auto& axis = chain.link(k).axis;
    if (!axis) continue;  // terminal link carries no offset
    const Rotation tail = relative_rotation(chain, angles, k + 1, j);
    out = out * exp_so3(tail.matrix().transpose() *
                        dagger(*axis, offsets(static_cast<Eigen::Index>(k - 1))));
  }
  return out;
}

FkNoiseSystem fk_noise_system(const KinematicChain& chain, const Eigen::VectorXd& angles) {
  check_angles(chain, angles);
  const auto prefix = prefix_rotations(chain, angles);
  const std::size_t n_links = chain.link_count();
  const std::size_t joints = chain.encoder_count();

  FkNoiseSystem sys;
  sys.rotation.resize(3, 3 * static_cast<Eigen::Index>(joints));
  sys.position.resize(3, 3 * static_cast<Eigen::Index>(joints));

  // lever[i] = sum_{n=i}^{N-1} A_{1,n+1} t_{n+1}, so that
  // A_{1,n+1} t^ A_{i+1,n+1}^T = (A_{1,n+1} t)^ A_{1,i+1}.
  std::vector<Vec3> lever(n_links + 1, Vec3::Zero());
  for (std::size_t i = joints; i >= 1; --i) {
    lever[i] = lever[i + 1] + prefix[i + 1] * chain.link(i + 1).translation;
  }
  const Mat3 base_to_contact_t = prefix[n_links + 1].matrix().transpose();
  for (std::size_t i = 1; i <= joints; ++i) {
    const Eigen::Index col = 3 * static_cast<Eigen::Index>(i - 1);
    sys.rotation.block<3, 3>(0, col) = base_to_contact_t * prefix[i + 1].matrix();
    sys.position.block<3, 3>(0, col) = -hat(lever[i]) * prefix[i + 1].matrix();
  }
  return sys;
}

Eigen::MatrixXd dagger_noise_covariance(const KinematicChain& chain,
                                        const Eigen::VectorXd& encoder_sigma) {
  const std::size_t joints = chain.encoder_count();
  if (static_cast<std::size_t>(encoder_sigma.size()) != joints) {
    throw Error(ErrorCode::DimensionMismatch, "encoder sigma length");
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3 * joints, 3 * joints);
  for (std::size_t k = 0; k < joints; ++k) {
    const double s = encoder_sigma(static_cast<Eigen::Index>(k));
    if (s < 0.0) throw Error(ErrorCode::NegativeSigma, "joint " + std::to_string(k + 1));
    const Vec3 e = axis_vector(*chain.link(k + 1).axis);
    cov.block<3, 3>(3 * k, 3 * k) = s * s * e * e.transpose();
  }
  return cov;
}

Mat6 fk_covariance(const KinematicChain& chain, const Eigen::VectorXd& angles,
                   const Eigen::VectorXd& encoder_sigma) {
  const Eigen::MatrixXd sigma = dagger_noise_covariance(chain, encoder_sigma);
  const FkNoiseSystem sys = fk_noise_system(chain, angles);
  Eigen::MatrixXd stacked(6, sys.rotation.cols());
  stacked << sys.rotation, sys.position;
  Mat6 cov = stacked * sigma * stacked.transpose();
  return 0.5 * (cov + cov.transpose());
}

FkResult evaluate_fk(const KinematicChain& chain, const Eigen::VectorXd& angles,
                     const Eigen::VectorXd& encoder_sigma) {
  FkResult out;
  out.pose = forward_kinematics(chain, angles);
  out.noise = fk_noise_system(chain, angles);
  const Eigen::MatrixXd sigma = dagger_noise_covariance(chain, encoder_sigma);
  Eigen::MatrixXd stacked(6, out.noise.rotation.cols());
  stacked << out.noise.rotation, out.noise.position;
  out.covariance = stacked * sigma * stacked.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

}  // namespace legged
