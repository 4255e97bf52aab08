#include <cmath>
#include <numbers>

#include "legged/sim.hpp"

namespace legged {

PathSample sample_path(const PathConfig& path, const GaitConfig& gait, double t) {
  const double T = gait.step_period;
  const double stride_rate = std::numbers::pi / T;   // one oscillation per two steps
  const double step_rate = 2.0 * std::numbers::pi / T;

  const double heading = path.curvature * path.speed * t;
  const double heading_rate = path.curvature * path.speed;
  const Vec3 tangent(std::cos(heading), std::sin(heading), 0.0);
  const Vec3 normal(-std::sin(heading), std::cos(heading), 0.0);

  Vec3 arc;
  if (std::abs(path.curvature) < 1e-12) {
    arc = Vec3(path.speed * t, 0.0, 0.0);
  } else {
    arc = Vec3(std::sin(heading), 1.0 - std::cos(heading), 0.0) / path.curvature;
  }

  const double sway = path.sway_amplitude * std::sin(stride_rate * t);
  const double sway_rate = path.sway_amplitude * stride_rate * std::cos(stride_rate * t);
  const double bob = path.bob_amplitude * std::cos(step_rate * t);
  const double bob_rate = -path.bob_amplitude * step_rate * std::sin(step_rate * t);

  PathSample s;
  s.p = arc + sway * normal + Vec3(0.0, 0.0, path.height + bob);
  s.v = path.speed * tangent + sway_rate * normal - sway * heading_rate * tangent +
        Vec3(0.0, 0.0, bob_rate);

  const double yaw = heading + path.yaw_amplitude * std::sin(stride_rate * t);
  const double pitch = path.pitch_amplitude * std::sin(step_rate * t);
  const double roll = path.roll_amplitude * std::sin(stride_rate * t);
  s.R = Rotation::about_z(yaw) * Rotation::about_y(pitch) * Rotation::about_x(roll);
  return s;
}

}  // namespace legged
