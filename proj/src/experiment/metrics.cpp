#include "legged/experiment/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "legged/error.hpp"

namespace legged {

std::vector<ErrorRecord> compute_relative_errors(std::span<const StampedPose> estimate,
                                                 std::span<const StampedPose> truth) {
  if (estimate.size() != truth.size()) {
    throw Error(ErrorCode::TimestampMismatch, "estimate and truth differ in length");
  }
  if (estimate.size() < 2) throw Error(ErrorCode::EmptyInput, "need at least two poses");
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    if (std::abs(estimate[k].timestamp - truth[k].timestamp) > 1e-9) {
      throw Error(ErrorCode::TimestampMismatch,
                  "node " + std::to_string(k) + " timestamps disagree");
    }
  }
  std::vector<ErrorRecord> out;
  out.reserve(estimate.size() - 1);
  for (std::size_t k = 1; k < estimate.size(); ++k) {
    const StampedPose& ei = estimate[k - 1];
    const StampedPose& ej = estimate[k];
    const StampedPose& ti = truth[k - 1];
    const StampedPose& tj = truth[k];
    const Vec3 dp_est = ei.R.matrix().transpose() * (ej.p - ei.p);
    const Vec3 dp_true = ti.R.matrix().transpose() * (tj.p - ti.p);
    const Rotation dr_est = ei.R.inverse() * ej.R;
    const Rotation dr_true = ti.R.inverse() * tj.R;
    out.push_back({k, (dp_est - dp_true).norm(), log_so3(dr_true.inverse() * dr_est).norm()});
  }
  return out;
}

std::vector<CdfPoint> compute_cdf(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values for the CDF");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  std::vector<CdfPoint> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k + 1 < v.size() && v[k + 1] == v[k]) continue;
    out.push_back({v[k], static_cast<double>(k + 1) / n});
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "median of nothing");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace legged
