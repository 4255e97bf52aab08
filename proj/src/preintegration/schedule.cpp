#include <algorithm>
#include <cmath>
#include <optional>

#include "legged/error.hpp"
#include "legged/preintegration.hpp"

namespace legged {
namespace {
constexpr double kTimeTol = 1e-9;
}

const Stance* ContactSchedule::stance_at(int foot, double t) const {
  for (const Stance& s : stances) {
    if (s.foot == foot && t >= s.t_begin - kTimeTol && t <= s.t_end + kTimeTol) return &s;
  }
  return nullptr;
}

bool ContactSchedule::in_contact(int foot, double t) const { return stance_at(foot, t) != nullptr; }

ContactSchedule build_contact_schedule(std::span<const ContactEvent> events, int foot_count,
                                       double t_begin, double t_end) {
  if (!(t_end > t_begin)) throw Error(ErrorCode::NonPositiveInterval, "schedule span");
  ContactSchedule out;
  out.foot_count = foot_count;

  std::vector<std::optional<double>> open(static_cast<std::size_t>(foot_count));
  double last_t = -std::numeric_limits<double>::infinity();
  for (const ContactEvent& e : events) {
    if (e.timestamp < last_t) throw Error(ErrorCode::NonMonotoneTime, "contact events out of order");
    last_t = e.timestamp;
    if (e.foot < 0 || e.foot >= foot_count) {
      throw Error(ErrorCode::IndexOutOfRange, "foot id " + std::to_string(e.foot));
    }
    if (e.timestamp > t_end + kTimeTol) continue;
    auto& slot = open[static_cast<std::size_t>(e.foot)];
    if (e.in_contact) {
      if (slot) throw Error(ErrorCode::InvalidArgument, "contact made twice without a break");
      slot = std::max(e.timestamp, t_begin);
    } else {
      if (!slot) throw Error(ErrorCode::InvalidArgument, "contact broken while not in contact");
      // A make and break within the same sample spans no time: no stance, no factor.
      if (e.timestamp - *slot > kTimeTol) out.stances.push_back({e.foot, *slot, e.timestamp});
      slot.reset();
    }
  }
  for (int f = 0; f < foot_count; ++f) {
    const auto& slot = open[static_cast<std::size_t>(f)];
    if (slot && t_end - *slot > kTimeTol) out.stances.push_back({f, *slot, t_end});
  }
  std::stable_sort(out.stances.begin(), out.stances.end(),
                   [](const Stance& a, const Stance& b) { return a.t_begin < b.t_begin; });

  std::vector<double> times{t_begin, t_end};
  for (const Stance& s : out.stances) {
    times.push_back(s.t_begin);
    times.push_back(s.t_end);
  }
  std::sort(times.begin(), times.end());
  for (double t : times) {
    if (out.node_times.empty() || t - out.node_times.back() > kTimeTol) out.node_times.push_back(t);
  }
  return out;
}

}  // namespace legged
