#pragma once

// Kinematic walking simulator: a curved base trajectory, alternating foot
// stances with the stance foot pinned to the ground, IMU samples whose
// discrete integration reproduces the ground truth exactly, and encoder
// angles obtained by inverse kinematics of each leg chain.

#include <cstdint>
#include <vector>

#include "legged/kinematics.hpp"
#include "legged/manifold.hpp"
#include "legged/graph/values.hpp"
#include "legged/preintegration.hpp"

namespace legged {

/// Sensor noise standard deviations. IMU and contact values are continuous
/// densities (per-sample sigma / sqrt(dt)); encoder and loop-closure values
/// are per-measurement.
struct NoiseConfig {
  double accel = 0.0307;        // m/s^2
  double gyro = 0.0014;         // rad/s
  double accel_bias = 0.005;    // m/s^2 random walk
  double gyro_bias = 0.0005;    // rad/s random walk
  double lc_translation = 0.1;  // m
  double lc_rotation = 0.0873;  // rad
  double contact_velocity = 0.1;  // m/s
  double encoder = 0.00873;     // rad
  // Not among the sensor sigmas above: slip rate of the foot orientation,
  // and the spread of the initial bias.
  double contact_angular = 0.05;  // rad/s
  double accel_bias_initial = 0.01;
  double gyro_bias_initial = 0.001;

  static NoiseConfig zero();
};

struct PathConfig {
  double speed = 0.5;            // m/s along the arc
  double curvature = 0.05;       // 1/m
  double height = 0.88;          // base height above ground, m
  double bob_amplitude = 0.015;  // m, once per step
  double sway_amplitude = 0.02;  // m lateral, once per stride
  double yaw_amplitude = 0.03;   // rad
  double pitch_amplitude = 0.02; // rad
  double roll_amplitude = 0.02;  // rad
};

struct GaitConfig {
  double step_period = 2.0 / 3.0;   // s between alternating touchdowns
  double double_support = 0.1;      // s both feet down after a touchdown
  double stance_width = 0.1;        // lateral foot offset from the path, m
};

struct SimConfig {
  double duration = 60.0;   // s
  double imu_rate = 200.0;  // Hz
  PathConfig path;
  GaitConfig gait;
  std::vector<KinematicChain> chains{spatial_leg_chain(0.1), spatial_leg_chain(-0.1)};
  NoiseConfig noise;
  std::uint64_t seed = 1;
  int lc_stride = 2;

  /// Throws InvalidArgument.
  void validate() const;
};

struct TruthState {
  double timestamp = 0.0;
  Rotation R;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

struct RelativePoseRecord {
  double t_i = 0.0;
  double t_j = 0.0;
  Pose measured;
  Mat6 covariance = Mat6::Identity();
};

struct Dataset {
  std::vector<ImuSample> imu;                         // sample k held over [t_k, t_{k+1})
  std::vector<std::vector<EncoderReading>> encoders;  // per foot, at every sample time and t_end
  std::vector<ContactEvent> contacts;
  std::vector<RelativePoseRecord> loop_closures;
  std::vector<TruthState> truth;                      // at node times

  int foot_count() const { return static_cast<int>(encoders.size()); }
  double start_time() const;
  double end_time() const;
};

/// Full-rate ground truth, kept alongside the dataset for tests.
struct TruthTrajectory {
  std::vector<TruthState> states;  // one per sample time, including t_end
  std::vector<ContactState> footholds;  // world pose of each stance, aligned with stances
  ContactSchedule schedule;
};

struct SimOutput {
  Dataset dataset;
  TruthTrajectory trajectory;
};

/// Noiseless dataset with loop closures at the configured stride.
/// Throws InfeasibleChain when a foothold is out of reach.
SimOutput generate_truth(const SimConfig& config);

/// IMU white noise plus random-walk bias, encoder noise, and loop-closure
/// noise R Exp(eps_R), p + R eps_p. Deterministic per seed; never touches timestamps.
Dataset corrupt(const Dataset& clean, const NoiseConfig& noise, std::uint64_t seed);

/// Relative poses (node k - stride, node k) for every other node k >= stride,
/// computed from the truth records at node times.
std::vector<RelativePoseRecord> emit_loop_closures(const Dataset& dataset, int stride,
                                                   const NoiseConfig& noise);

/// Newton iterations on the 6-DOF pose error; throws InfeasibleChain when the
/// target is not reached to 1e-12.
Eigen::VectorXd inverse_kinematics(const KinematicChain& chain, const FkPose& target,
                                   const Eigen::VectorXd& initial_guess);

/// Nominal bent-knee posture used to seed the leg IK.
Eigen::VectorXd nominal_leg_angles(const KinematicChain& chain);

/// Base pose and velocity of the smooth reference path.
struct PathSample {
  Rotation R;
  Vec3 p;
  Vec3 v;
};
PathSample sample_path(const PathConfig& path, const GaitConfig& gait, double t);

}  // namespace legged
