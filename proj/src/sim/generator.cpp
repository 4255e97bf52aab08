#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "legged/error.hpp"
#include "legged/sim.hpp"

namespace legged {

NoiseConfig NoiseConfig::zero() {
  NoiseConfig n;
  n.accel = n.gyro = n.accel_bias = n.gyro_bias = 0.0;
  n.lc_translation = n.lc_rotation = n.contact_velocity = n.contact_angular = n.encoder = 0.0;
  n.accel_bias_initial = n.gyro_bias_initial = 0.0;
  return n;
}

void SimConfig::validate() const {
  if (!(imu_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "imu_rate must be positive");
  if (!(gait.step_period > 0.0)) throw Error(ErrorCode::InvalidArgument, "step_period must be positive");
  if (!(duration > gait.step_period)) {
    throw Error(ErrorCode::InvalidArgument, "duration must exceed one step period");
  }
  if (gait.double_support < 0.0 || gait.double_support >= gait.step_period) {
    throw Error(ErrorCode::InvalidArgument, "double_support must lie in [0, step_period)");
  }
  if (chains.size() != 2u) {
    throw Error(ErrorCode::InvalidArgument, "simulator drives exactly two legs");
  }
  if (lc_stride < 1) throw Error(ErrorCode::InvalidArgument, "lc_stride must be >= 1");
  const double sig[] = {noise.accel, noise.gyro, noise.accel_bias, noise.gyro_bias,
                        noise.lc_translation, noise.lc_rotation, noise.contact_velocity, noise.contact_angular,
                        noise.encoder, noise.accel_bias_initial, noise.gyro_bias_initial};
  for (double s : sig) {
    if (s < 0.0) throw Error(ErrorCode::NegativeSigma, "noise standard deviations must be >= 0");
  }
}

double Dataset::start_time() const {
  if (imu.empty()) throw Error(ErrorCode::EmptyStream, "dataset has no IMU samples");
  return imu.front().timestamp;
}

double Dataset::end_time() const {
  if (encoders.empty() || encoders.front().empty()) {
    throw Error(ErrorCode::EmptyStream, "dataset has no encoder readings");
  }
  return encoders.front().back().timestamp;
}

namespace {

struct StanceIndex {
  int foot;
  long begin;
  long end;  // inclusive sample index
};

double yaw_of(const Rotation& r) { return std::atan2(r.matrix()(1, 0), r.matrix()(0, 0)); }

// Alternating gait: foot 0 lands at 0, 2T, 4T...; foot 1 at T, 3T...; each
// stance lasts T + double_support. Foot 1 also starts on the ground and lifts
// after the initial double support.
std::vector<StanceIndex> plan_stances(const SimConfig& cfg, long last_index) {
  const double T = cfg.gait.step_period;
  const double ds = cfg.gait.double_support;
  auto to_index = [&](double t) { return std::lround(t * cfg.imu_rate); };

  std::vector<StanceIndex> out;
  auto push = [&](int foot, double begin, double end) {
    const long b = to_index(begin);
    if (b > last_index) return;
    const long e = std::min(to_index(end), last_index);
    if (e > b) out.push_back({foot, b, e});
  };
  push(1, 0.0, ds);
  for (long k = 0;; ++k) {
    const double td = static_cast<double>(k) * T;
    if (to_index(td) > last_index) break;
    push(static_cast<int>(k % 2), td, td + T + ds);
  }
  std::sort(out.begin(), out.end(), [](const StanceIndex& a, const StanceIndex& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.foot < b.foot;
  });
  return out;
}

double smooth_blend(double u) { return 0.5 * (1.0 - std::cos(std::numbers::pi * u)); }

}  // namespace

SimOutput generate_truth(const SimConfig& cfg) {
  cfg.validate();
  const double dt = 1.0 / cfg.imu_rate;
  const long K = std::lround(cfg.duration * cfg.imu_rate);
  auto time_of = [&](long k) { return static_cast<double>(k) / cfg.imu_rate; };

  SimOutput out;
  Dataset& data = out.dataset;
  TruthTrajectory& truth = out.trajectory;

  // Base motion: IMU samples from the smooth path, truth by integrating them.
  std::vector<PathSample> path(static_cast<std::size_t>(K + 1));
  for (long k = 0; k <= K; ++k) path[static_cast<std::size_t>(k)] = sample_path(cfg.path, cfg.gait, time_of(k));

  truth.states.resize(static_cast<std::size_t>(K + 1));
  TruthState state{0.0, path[0].R, path[0].p, path[0].v};
  truth.states[0] = state;
  data.imu.reserve(static_cast<std::size_t>(K));
  for (long k = 0; k < K; ++k) {
    const auto& cur = path[static_cast<std::size_t>(k)];
    const auto& nxt = path[static_cast<std::size_t>(k + 1)];
    ImuSample s;
    s.timestamp = time_of(k);
    s.gyro = log_so3(cur.R.inverse() * nxt.R) / dt;
    s.accel = state.R.matrix().transpose() * ((nxt.v - cur.v) / dt - kGravity);
    data.imu.push_back(s);

    const Vec3 acc_world = state.R * s.accel + kGravity;
    state.p = state.p + state.v * dt + 0.5 * acc_world * dt * dt;
    state.v = state.v + acc_world * dt;
    state.R = (state.R * exp_so3(s.gyro * dt)).normalized_if_needed();
    state.timestamp = time_of(k + 1);
    truth.states[static_cast<std::size_t>(k + 1)] = state;
  }

  // Contacts.
  const std::vector<StanceIndex> stances = plan_stances(cfg, K);
  for (const StanceIndex& s : stances) {
    data.contacts.push_back({time_of(s.begin), s.foot, true});
    if (s.end < K) data.contacts.push_back({time_of(s.end), s.foot, false});
  }
  std::stable_sort(data.contacts.begin(), data.contacts.end(),
                   [](const ContactEvent& a, const ContactEvent& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     if (a.in_contact != b.in_contact) return !a.in_contact;  // breaks first
                     return a.foot < b.foot;
                   });
  truth.schedule = build_contact_schedule(data.contacts, 2, 0.0, time_of(K));

  // Footholds at mid-stance, encoders by inverse kinematics.
  const int feet = static_cast<int>(cfg.chains.size());
  std::vector<std::vector<Eigen::VectorXd>> angles(static_cast<std::size_t>(feet));
  std::vector<std::vector<bool>> filled(static_cast<std::size_t>(feet));
  for (int f = 0; f < feet; ++f) {
    angles[static_cast<std::size_t>(f)].resize(static_cast<std::size_t>(K + 1));
    filled[static_cast<std::size_t>(f)].assign(static_cast<std::size_t>(K + 1), false);
  }

  for (const StanceIndex& s : stances) {
    const KinematicChain& chain = cfg.chains[static_cast<std::size_t>(s.foot)];
    const TruthState& mid = truth.states[static_cast<std::size_t>((s.begin + s.end) / 2)];
    const double yaw = yaw_of(mid.R);
    const double side = s.foot == 0 ? 1.0 : -1.0;
    ContactState foothold;
    foothold.C = Rotation::about_z(yaw);
    foothold.d = mid.p + foothold.C * Vec3(0.0, side * cfg.gait.stance_width, 0.0);
    foothold.d.z() = 0.0;
    truth.footholds.push_back(foothold);

    Eigen::VectorXd guess = nominal_leg_angles(chain);
    for (long k = s.begin; k <= s.end; ++k) {
      const TruthState& base = truth.states[static_cast<std::size_t>(k)];
      FkPose target;
      target.rotation = base.R.inverse() * foothold.C;
      target.position = base.R.matrix().transpose() * (foothold.d - base.p);
      guess = inverse_kinematics(chain, target, guess);
      angles[static_cast<std::size_t>(s.foot)][static_cast<std::size_t>(k)] = guess;
      filled[static_cast<std::size_t>(s.foot)][static_cast<std::size_t>(k)] = true;
    }
  }

  // Swing: blend between the surrounding stance postures.
  for (int f = 0; f < feet; ++f) {
    auto& a = angles[static_cast<std::size_t>(f)];
    const auto& ok = filled[static_cast<std::size_t>(f)];
    long k = 0;
    while (k <= K) {
      if (ok[static_cast<std::size_t>(k)]) { ++k; continue; }
      const long gap_begin = k;
      while (k <= K && !ok[static_cast<std::size_t>(k)]) ++k;
      const long gap_end = k;  // first filled index after the gap, or K + 1
      const Eigen::VectorXd from = gap_begin > 0 ? a[static_cast<std::size_t>(gap_begin - 1)]
                                                 : nominal_leg_angles(cfg.chains[static_cast<std::size_t>(f)]);
      const Eigen::VectorXd to = gap_end <= K ? a[static_cast<std::size_t>(gap_end)] : from;
      const double span = static_cast<double>(gap_end - gap_begin + 1);
      for (long m = gap_begin; m < gap_end; ++m) {
        const double u = smooth_blend(static_cast<double>(m - gap_begin + 1) / span);
        a[static_cast<std::size_t>(m)] = (1.0 - u) * from + u * to;
      }
    }
  }

  data.encoders.resize(static_cast<std::size_t>(feet));
  for (int f = 0; f < feet; ++f) {
    auto& stream = data.encoders[static_cast<std::size_t>(f)];
    stream.reserve(static_cast<std::size_t>(K + 1));
    for (long k = 0; k <= K; ++k) {
      stream.push_back({time_of(k), angles[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)]});
    }
  }

  for (double t : truth.schedule.node_times) {
    data.truth.push_back(truth.states[static_cast<std::size_t>(std::lround(t * cfg.imu_rate))]);
  }
  data.loop_closures = emit_loop_closures(data, cfg.lc_stride, cfg.noise);
  return out;
}

std::vector<RelativePoseRecord> emit_loop_closures(const Dataset& dataset, int stride,
                                                   const NoiseConfig& noise) {
  if (stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
  Mat6 cov = Mat6::Zero();
  cov.topLeftCorner<3, 3>() = noise.lc_rotation * noise.lc_rotation * Mat3::Identity();
  cov.bottomRightCorner<3, 3>() = noise.lc_translation * noise.lc_translation * Mat3::Identity();

  std::vector<RelativePoseRecord> out;
  const auto n = static_cast<long>(dataset.truth.size());
  for (long k = stride; k < n; k += 2) {
    const TruthState& a = dataset.truth[static_cast<std::size_t>(k - stride)];
    const TruthState& b = dataset.truth[static_cast<std::size_t>(k)];
    RelativePoseRecord rec;
    rec.t_i = a.timestamp;
    rec.t_j = b.timestamp;
    rec.measured = Pose{a.R, a.p}.inverse().compose(Pose{b.R, b.p});
    rec.covariance = cov;
    out.push_back(rec);
  }
  return out;
}

Dataset corrupt(const Dataset& clean, const NoiseConfig& noise, std::uint64_t seed) {
  Dataset out = clean;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gauss3 = [&](double sigma) {
    Vec3 x;
    for (int i = 0; i < 3; ++i) x(i) = sigma * normal(rng);
    return x;
  };

  if (!out.imu.empty()) {
    const double t_end = clean.encoders.empty() || clean.encoders.front().empty()
                             ? clean.imu.back().timestamp
                             : clean.end_time();
    Vec3 bg = gauss3(noise.gyro_bias_initial);
    Vec3 ba = gauss3(noise.accel_bias_initial);
    for (std::size_t k = 0; k < out.imu.size(); ++k) {
      const double next = k + 1 < out.imu.size() ? out.imu[k + 1].timestamp : t_end;
      const double dt = next - out.imu[k].timestamp;
      const double root = dt > 0.0 ? std::sqrt(dt) : 1.0;
      out.imu[k].gyro += bg + gauss3(noise.gyro / root);
      out.imu[k].accel += ba + gauss3(noise.accel / root);
      bg += gauss3(noise.gyro_bias * root);
      ba += gauss3(noise.accel_bias * root);
    }
  }

  for (auto& stream : out.encoders) {
    for (auto& reading : stream) {
      for (Eigen::Index j = 0; j < reading.angles.size(); ++j) {
        reading.angles(j) += noise.encoder * normal(rng);
      }
    }
  }

  for (auto& lc : out.loop_closures) {
    const Vec3 eps_r = gauss3(noise.lc_rotation);
    const Vec3 eps_p = gauss3(noise.lc_translation);
    lc.measured.translation = lc.measured.translation + lc.measured.rotation * eps_p;
    lc.measured.rotation = lc.measured.rotation * exp_so3(eps_r);
  }
  return out;
}

}  // namespace legged
