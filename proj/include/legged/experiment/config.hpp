#pragma once

// Harness configuration: a flat `key = value` file with [sections].
//
//   [sim]       duration, imu_rate, seed, lc_stride, speed, curvature, height,
//               bob, sway, yaw, pitch, roll, step_period, double_support,
//               stance_width
//   [noise]     accel, gyro, accel_bias, gyro_bias, lc_translation,
//               lc_rotation, contact_velocity, contact_angular, encoder,
//               accel_bias_initial, gyro_bias_initial
//   [prior]     rotation, position, velocity, gyro_bias, accel_bias (sigmas)
//   [solver]    lambda_initial, lambda_up, lambda_down, lambda_max,
//               relative_cost_tolerance, gradient_tolerance, max_iterations,
//               jacobian (analytic|numeric), execution (parallel|serial)
//   [run]       preset (imu_only|imu_lc|imu_contact_fk|all),
//               contact_kind (rigid|point), fk_covariance_floor
//   [chain.F]   one `link = ...` line per link of foot F, either
//               9 rotation entries (row-major) + 3 translation + axis, or
//               3 rotation-vector entries + 3 translation + axis;
//               axis is x, y, z, or - for the terminal link.
//
// '#' starts a comment. Unknown keys are parse errors.

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "legged/graph/solver.hpp"
#include "legged/preintegration.hpp"
#include "legged/sim.hpp"

namespace legged {

enum class RunPreset { ImuOnly, ImuLc, ImuContactFk, All };

std::string_view to_string(RunPreset preset);
/// Accepts the snake_case names above. Throws InvalidArgument.
RunPreset parse_preset(std::string_view name);

inline bool uses_loop_closures(RunPreset p) { return p == RunPreset::ImuLc || p == RunPreset::All; }
inline bool uses_contacts(RunPreset p) { return p == RunPreset::ImuContactFk || p == RunPreset::All; }

/// Standard deviations of the anchor prior on the first node.
struct PriorSigmas {
  double rotation = 1e-3;
  double position = 1e-3;
  double velocity = 1e-3;
  double gyro_bias = 1e-3;
  double accel_bias = 1e-2;
};

struct EstimatorConfig {
  RunPreset preset = RunPreset::All;
  ContactKind contact_kind = ContactKind::Rigid;
  NoiseConfig noise;
  PriorSigmas prior;
  LmConfig solver;
  // Added to the FK covariance diagonal; keeps rank-deficient chains usable.
  double fk_covariance_floor = 1e-10;
  std::vector<KinematicChain> chains{spatial_leg_chain(0.1), spatial_leg_chain(-0.1)};
};

struct HarnessConfig {
  SimConfig sim;
  EstimatorConfig estimator;
};

/// Throws ParseError with the offending line number.
HarnessConfig parse_config(std::istream& in);
/// Throws ParseError (line 0) when the file cannot be opened.
HarnessConfig load_config(const std::filesystem::path& path);

/// Writes a config that parse_config reads back to the same values.
void write_config(std::ostream& out, const HarnessConfig& config);

}  // namespace legged
