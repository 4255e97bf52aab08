#include <Eigen/Eigenvalues>

#include "legged/manifold.hpp"

namespace legged {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sigma) {
  const Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * ev.asDiagonal();
}

Eigen::VectorXd sample_gaussian(const Eigen::MatrixXd& sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(sigma.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return psd_sqrt(sigma) * z;
}

Rotation sample_rotation_noise(const Mat3& sigma, std::mt19937_64& rng) {
  const Vec3 eps = sample_gaussian(sigma, rng);
  return exp_so3(eps);
}

Rotation sample_rotation_noise(const Mat3& sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_rotation_noise(sigma, rng);
}

}  // namespace legged
