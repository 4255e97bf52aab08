#pragma once

#include <span>
#include <vector>

#include "legged/manifold.hpp"

namespace legged {

/// Timestamped base pose, the common currency of estimate and truth.
struct StampedPose {
  double timestamp = 0.0;
  Rotation R;
  Vec3 p = Vec3::Zero();
};

struct ErrorRecord {
  std::size_t node = 0;        // index of the later node of the pair
  double translation = 0.0;    // m
  double rotation = 0.0;       // rad
};

/// Relative-pose errors between consecutive nodes. Translation compares
/// R_i^T (p_j - p_i) between estimate and truth; rotation is
/// ||Log(dR_true^T dR_est)||. Throws TimestampMismatch, EmptyInput.
std::vector<ErrorRecord> compute_relative_errors(std::span<const StampedPose> estimate,
                                                 std::span<const StampedPose> truth);

struct CdfPoint {
  double threshold = 0.0;
  double fraction = 0.0;
};

/// Empirical CDF at each distinct value. Throws EmptyInput.
std::vector<CdfPoint> compute_cdf(std::span<const double> values);

double median(std::vector<double> values);

}  // namespace legged
