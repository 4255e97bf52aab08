#pragma once

// Preintegrated measurements between two graph nodes: on-manifold IMU deltas,
// rigid-contact deltas, and point-contact deltas whose covariance is
// propagated through the gyro-integrated rotation and the leg kinematics.

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "legged/kinematics.hpp"
#include "legged/manifold.hpp"

namespace legged {

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec9 = Eigen::Matrix<double, 9, 1>;

/// World gravity, z up.
inline const Vec3 kGravity(0.0, 0.0, -9.81);

struct ImuSample {
  double timestamp = 0.0;
  Vec3 gyro = Vec3::Zero();   // rad/s
  Vec3 accel = Vec3::Zero();  // m/s^2, specific force
};

struct ImuBias {
  Vec3 gyro = Vec3::Zero();
  Vec3 accel = Vec3::Zero();

  Vec6 vector() const {
    Vec6 v;
    v << gyro, accel;
    return v;
  }
  static ImuBias from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
};

/// Continuous-time noise densities. Per-sample covariance is sigma^2 / dt.
struct ImuNoise {
  double gyro_sigma = 0.0;        // rad/s/sqrt(Hz)
  double accel_sigma = 0.0;       // m/s^2/sqrt(Hz)
  double gyro_bias_sigma = 0.0;   // rad/s*sqrt(Hz) random walk
  double accel_bias_sigma = 0.0;  // m/s^2*sqrt(Hz) random walk
};

/// Relative motion increment (dR, dv, dp) integrated at a fixed bias, with
/// first-order bias Jacobians and a covariance over (dphi, dv, dp).
struct ImuDelta {
  Rotation delta_R;
  Vec3 delta_v = Vec3::Zero();
  Vec3 delta_p = Vec3::Zero();
  double dt_total = 0.0;
  Mat9 covariance = Mat9::Zero();
  ImuBias bias_lin;

  Mat3 dR_dbg = Mat3::Zero();
  Mat3 dv_dbg = Mat3::Zero();
  Mat3 dv_dba = Mat3::Zero();
  Mat3 dp_dbg = Mat3::Zero();
  Mat3 dp_dba = Mat3::Zero();

  /// Increment re-expressed at a different bias using the stored Jacobians.
  struct Corrected {
    Rotation delta_R;
    Vec3 delta_v;
    Vec3 delta_p;
  };
  Corrected corrected(const ImuBias& bias) const;
};

/// Single-writer accumulator for one IMU stream segment.
class ImuPreintegrator {
 public:
  ImuPreintegrator(const ImuBias& bias_lin, const ImuNoise& noise);

  /// Absorbs one sample held constant over dt seconds.
  void integrate(const Vec3& gyro, const Vec3& accel, double dt);

  const ImuDelta& delta() const { return delta_; }

 private:
  ImuDelta delta_;
  ImuNoise noise_;
};

/// Sample k is held over [t_k, t_{k+1}); the last sample runs until t_end.
/// Throws EmptyStream or NonMonotoneTime.
ImuDelta imu_preintegrate(std::span<const ImuSample> samples, double t_end,
                          const ImuBias& bias_lin, const ImuNoise& noise);

/// Concatenates [t_i, t_k] and [t_k, t_j]. Both must share the linearization bias.
ImuDelta compose(const ImuDelta& first, const ImuDelta& second);

enum class ContactKind { Rigid, Point };

struct ContactDelta {
  ContactKind kind = ContactKind::Rigid;
  double t_i = 0.0;
  double t_j = 0.0;
  Rotation delta_C;                   // identity for a fixed contact
  Vec3 delta_d = Vec3::Zero();        // zero for a fixed contact
  Eigen::MatrixXd covariance;         // 6x6 rigid, 3x3 point
};

/// Closed-form rigid contact covariance blkdiag(sigma_w, sigma_v) * (t_j - t_i).
/// Throws NonPositiveInterval.
ContactDelta rigid_contact_preintegrate(double t_i, double t_j, const Mat3& sigma_w,
                                        const Mat3& sigma_v);

/// Per-sample continuous covariances (angular, linear) for time-varying slip noise.
using ContactNoiseFn = std::function<std::pair<Mat3, Mat3>(double t)>;

/// Iterative rigid-contact accumulator; each step adds blkdiag(Sw, Sv) dt.
class RigidContactPreintegrator {
 public:
  RigidContactPreintegrator(double t_i, ContactNoiseFn noise);

  /// Throws BrokenContact when in_contact is false, NonPositiveInterval if dt <= 0.
  void integrate(double dt, bool in_contact = true);

  ContactDelta delta() const;

 private:
  double t_i_;
  double t_ = 0.0;
  ContactNoiseFn noise_;
  Mat6 covariance_ = Mat6::Zero();
};

/// Iterative form over explicit sample intervals with constant noise.
ContactDelta rigid_contact_preintegrate(double t_i, std::span<const double> dt_samples,
                                        const Mat3& sigma_w, const Mat3& sigma_v);

struct PointContactInputs {
  std::span<const ImuSample> imu;            // samples over [t_i, t_j)
  std::span<const EncoderReading> encoders;  // aligned with imu timestamps
  double t_end = 0.0;                        // t_j
};

/// Point-contact delta: zero displacement with covariance
/// Sigma_{k+1} = Sigma_k + B Sigma_vd B^T, where B = R_i^T C_i dt for the first
/// step and dR_ik fk_R(alpha_k) dt afterwards. Sigma_vd is the discrete
/// (per-sample) contact velocity covariance.
/// Throws EmptyStream, DimensionMismatch, NonMonotoneTime, BrokenContact.
ContactDelta point_contact_preintegrate(const PointContactInputs& inputs,
                                        const KinematicChain& chain, const Rotation& contact_i,
                                        const Rotation& base_i, const ImuBias& bias_lin,
                                        const Mat3& sigma_vd,
                                        std::span<const bool> in_contact = {});

/// Per-step B matrices of the point-contact recursion, in order.
std::vector<Mat3> point_contact_noise_maps(const PointContactInputs& inputs,
                                           const KinematicChain& chain, const Rotation& contact_i,
                                           const Rotation& base_i, const ImuBias& bias_lin);

/// vec(Log(C_i^T C_j), C_i^T (d_j - d_i)).
Vec6 rigid_contact_residual(const Rotation& c_i, const Vec3& d_i, const Rotation& c_j,
                            const Vec3& d_j);

/// R_i^T (d_j - d_i).
Vec3 point_contact_residual(const Rotation& r_i, const Vec3& d_i, const Vec3& d_j);

struct ContactEvent {
  double timestamp = 0.0;
  int foot = 0;
  bool in_contact = false;
};

/// A closed interval during which one foot stays on the ground.
struct Stance {
  int foot = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
};

/// Node and stance layout derived from contact make/break events.
struct ContactSchedule {
  std::vector<double> node_times;   // sorted, unique
  std::vector<Stance> stances;      // per foot, in time order
  int foot_count = 0;

  /// True when the foot is on the ground at t (stance endpoints inclusive).
  bool in_contact(int foot, double t) const;
  /// Stance containing t for the foot, if any.
  const Stance* stance_at(int foot, double t) const;
};

/// Nodes are placed at t_begin, t_end, and every contact make/break. A foot
/// whose make and break coincide contributes nothing. Open stances end at
/// t_end. Throws NonMonotoneTime for unsorted events.
ContactSchedule build_contact_schedule(std::span<const ContactEvent> events, int foot_count,
                                       double t_begin, double t_end);

}  // namespace legged
