#include "legged/experiment/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include "legged/error.hpp"

namespace legged {

namespace {

constexpr double kTimeTol = 1e-9;

std::size_t index_at(std::span<const double> times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t - kTimeTol);
  if (it == times.end() || std::abs(*it - t) > kTimeTol) {
    throw Error(ErrorCode::TimestampMismatch, "no record at t = " + std::to_string(t));
  }
  return static_cast<std::size_t>(it - times.begin());
}

std::size_t first_at_or_after(std::span<const double> times, double t) {
  return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t - kTimeTol) -
                                  times.begin());
}

template <typename T>
std::vector<double> stamps(const std::vector<T>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.timestamp);
  return out;
}

Eigen::Matrix<double, 15, 15> prior_covariance(const PriorSigmas& s) {
  Eigen::Matrix<double, 15, 1> d;
  d << Vec3::Constant(s.rotation * s.rotation), Vec3::Constant(s.position * s.position),
      Vec3::Constant(s.velocity * s.velocity), Vec3::Constant(s.gyro_bias * s.gyro_bias),
      Vec3::Constant(s.accel_bias * s.accel_bias);
  return d.asDiagonal();
}

void write_line(std::FILE* f, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    std::fprintf(f, first ? "%.17g" : " %.17g", v);
    first = false;
  }
  std::fputc('\n', f);
}

struct File {
  explicit File(const std::filesystem::path& p) : f(std::fopen(p.string().c_str(), "wb")) {
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + p.string() + "'");
  }
  ~File() { std::fclose(f); }
  File(const File&) = delete;
  File& operator=(const File&) = delete;
  std::FILE* f;
};

void write_cdf(const std::filesystem::path& p, std::span<const double> values) {
  File out(p);
  std::fprintf(out.f, "# threshold fraction\n");
  for (const CdfPoint& c : compute_cdf(values)) write_line(out.f, {c.threshold, c.fraction});
}

}  // namespace

std::vector<StampedPose> truth_poses(const Dataset& dataset) {
  std::vector<StampedPose> out;
  out.reserve(dataset.truth.size());
  for (const TruthState& t : dataset.truth) out.push_back({t.timestamp, t.R, t.p});
  return out;
}

Problem build_problem(const Dataset& data, const EstimatorConfig& cfg) {
  if (data.truth.empty()) throw Error(ErrorCode::EmptyStream, "dataset has no TRU records");
  const double t_begin = data.start_time();
  const double t_end = data.end_time();
  const int feet = data.foot_count();
  if (static_cast<std::size_t>(feet) > cfg.chains.size()) {
    throw Error(ErrorCode::DimensionMismatch, "more encoder streams than configured chains");
  }

  Problem prob;
  prob.schedule = build_contact_schedule(data.contacts, feet, t_begin, t_end);
  const auto& node_times = prob.schedule.node_times;
  if (data.truth.size() != node_times.size()) {
    throw Error(ErrorCode::TimestampMismatch, "TRU records do not match the node schedule");
  }
  for (std::size_t k = 0; k < node_times.size(); ++k) {
    if (std::abs(data.truth[k].timestamp - node_times[k]) > kTimeTol) {
      throw Error(ErrorCode::TimestampMismatch, "TRU record " + std::to_string(k) + " is off-node");
    }
  }

  const bool contacts = uses_contacts(cfg.preset);
  const NoiseConfig& n = cfg.noise;
  const std::vector<double> imu_times = stamps(data.imu);
  std::vector<std::vector<double>> enc_times;
  for (const auto& stream : data.encoders) enc_times.push_back(stamps(stream));

  ImuNoise imu_noise{n.gyro, n.accel, n.gyro_bias, n.accel_bias};
  const ImuBias bias_lin;

  auto imu_range = [&](double t_i, double t_j) {
    const std::size_t a = first_at_or_after(imu_times, t_i);
    const std::size_t b = first_at_or_after(imu_times, t_j);
    return std::span<const ImuSample>(data.imu).subspan(a, b - a);
  };
  auto encoder_at = [&](int foot, double t) -> const EncoderReading& {
    return data.encoders[static_cast<std::size_t>(foot)][index_at(enc_times[static_cast<std::size_t>(foot)], t)];
  };

  // Nodes, dead-reckoned from the first truth record.
  std::vector<ImuDelta> deltas;
  const TruthState& t0 = data.truth.front();
  NavState state;
  state.R = t0.R;
  state.p = t0.p;
  state.v = t0.v;
  for (std::size_t k = 0; k < node_times.size(); ++k) {
    const double t = node_times[k];
    if (k > 0) {
      const auto seg = imu_range(node_times[k - 1], t);
      deltas.push_back(imu_preintegrate(seg, t, bias_lin, imu_noise));
      const ImuDelta& d = deltas.back();
      const double dt = d.dt_total;
      state.p = state.p + state.v * dt + 0.5 * kGravity * dt * dt + state.R * d.delta_p;
      state.v = state.v + kGravity * dt + state.R * d.delta_v;
      state.R = (state.R * d.delta_R).normalized_if_needed();
    }
    state.timestamp = t;
    for (int f = 0; f < kMaxFeet; ++f) {
      state.contacts[static_cast<std::size_t>(f)].reset();
      if (!contacts || f >= feet || !prob.schedule.in_contact(f, t)) continue;
      const FkPose fk = forward_kinematics(cfg.chains[static_cast<std::size_t>(f)], encoder_at(f, t).angles);
      state.contacts[static_cast<std::size_t>(f)] =
          ContactState{state.R * fk.rotation, state.p + state.R * fk.position};
    }
    prob.initial.add_node(t, state);
  }

  // Anchor, IMU, and bias evolution.
  PriorMean mean{t0.R, t0.p, t0.v, ImuBias{}};
  prob.graph.emplace<PriorFactor>(0, mean, prior_covariance(cfg.prior));
  for (std::size_t k = 1; k < node_times.size(); ++k) {
    prob.graph.emplace<ImuFactor>(k - 1, k, deltas[k - 1]);
    const double dt = deltas[k - 1].dt_total;
    Vec6 rw;
    rw << Vec3::Constant(n.gyro_bias * n.gyro_bias * dt), Vec3::Constant(n.accel_bias * n.accel_bias * dt);
    prob.graph.emplace<BiasRandomWalkFactor>(k - 1, k, Mat6(rw.asDiagonal()));
  }

  if (uses_loop_closures(cfg.preset)) {
    for (const RelativePoseRecord& lc : data.loop_closures) {
      RelativePoseMeasurement m;
      m.i = index_at(node_times, lc.t_i);
      m.j = index_at(node_times, lc.t_j);
      m.measured = lc.measured;
      m.covariance = lc.covariance;
      prob.graph.emplace<RelativePoseFactor>(m);
    }
  }

  if (contacts) {
    const Mat3 sigma_w = n.contact_angular * n.contact_angular * Mat3::Identity();
    const Mat3 sigma_v = n.contact_velocity * n.contact_velocity * Mat3::Identity();
    for (int f = 0; f < feet; ++f) {
      const KinematicChain& chain = cfg.chains[static_cast<std::size_t>(f)];
      const Eigen::VectorXd enc_sigma =
          Eigen::VectorXd::Constant(static_cast<Eigen::Index>(chain.encoder_count()), n.encoder);
      for (std::size_t k = 0; k < node_times.size(); ++k) {
        const double t = node_times[k];
        if (!prob.schedule.in_contact(f, t)) continue;
        const FkResult fk = evaluate_fk(chain, encoder_at(f, t).angles, enc_sigma);
        const Mat6 cov = fk.covariance + cfg.fk_covariance_floor * Mat6::Identity();
        prob.graph.emplace<ForwardKinematicFactor>(k, f, fk.pose, cov);

        if (k == 0) continue;
        const double t_prev = node_times[k - 1];
        const Stance* a = prob.schedule.stance_at(f, t_prev);
        const Stance* b = prob.schedule.stance_at(f, t);
        if (a == nullptr || a != b) continue;
        if (cfg.contact_kind == ContactKind::Rigid) {
          prob.graph.emplace<RigidContactFactor>(k - 1, k, f,
                                                 rigid_contact_preintegrate(t_prev, t, sigma_w, sigma_v));
        } else {
          const auto seg = imu_range(t_prev, t);
          const std::size_t e0 = index_at(enc_times[static_cast<std::size_t>(f)], t_prev);
          PointContactInputs in{seg,
                                std::span<const EncoderReading>(data.encoders[static_cast<std::size_t>(f)])
                                    .subspan(e0, seg.size()),
                                t};
          const NavState& si = prob.initial.at(k - 1);
          const double dt = seg.size() > 1 ? seg[1].timestamp - seg[0].timestamp : t - t_prev;
          const Mat3 sigma_vd = sigma_v / dt;
          prob.graph.emplace<PointContactFactor>(
              k - 1, k, f,
              point_contact_preintegrate(in, chain, si.contact(f).C, si.R, bias_lin, sigma_vd));
        }
      }
    }
  }
  return prob;
}

RunResult run_estimator(const Dataset& dataset, const EstimatorConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Problem prob = build_problem(dataset, config);
  RunResult out;
  out.preset = config.preset;
  out.solve = optimize(prob.graph, prob.initial, config.solver);
  for (const NavState& s : out.solve.values.states()) out.estimate.push_back({s.timestamp, s.R, s.p});
  const auto truth = truth_poses(dataset);
  out.errors = compute_relative_errors(out.estimate, truth);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_run_outputs(const std::filesystem::path& dir, const RunResult& r) {
  std::filesystem::create_directories(dir);
  {
    File out(dir / "trajectory.txt");
    std::fprintf(out.f, "# t R00 R01 R02 R10 R11 R12 R20 R21 R22 px py pz\n");
    for (const StampedPose& s : r.estimate) {
      const Mat3& m = s.R.matrix();
      write_line(out.f, {s.timestamp, m(0, 0), m(0, 1), m(0, 2), m(1, 0), m(1, 1), m(1, 2), m(2, 0),
                         m(2, 1), m(2, 2), s.p.x(), s.p.y(), s.p.z()});
    }
  }
  std::vector<double> trans, rot;
  {
    File out(dir / "errors.txt");
    std::fprintf(out.f, "# node translation_m rotation_rad\n");
    for (const ErrorRecord& e : r.errors) {
      std::fprintf(out.f, "%zu %.17g %.17g\n", e.node, e.translation, e.rotation);
      trans.push_back(e.translation);
      rot.push_back(e.rotation);
    }
  }
  write_cdf(dir / "cdf_trans.txt", trans);
  write_cdf(dir / "cdf_rot.txt", rot);
  File out(dir / "summary.txt");
  std::fprintf(out.f, "status = ok\npreset = %s\nnodes = %zu\ninitial_cost = %.17g\n",
               std::string(to_string(r.preset)).c_str(), r.estimate.size(), r.solve.initial_cost);
  std::fprintf(out.f, "final_cost = %.17g\niterations = %d\ntermination = %s\n", r.solve.final_cost,
               r.solve.iterations, r.solve.termination.c_str());
  std::fprintf(out.f, "median_translation = %.17g\nmedian_rotation = %.17g\n", median(trans), median(rot));
  std::fprintf(out.f, "max_translation = %.17g\nmax_rotation = %.17g\n",
               *std::max_element(trans.begin(), trans.end()), *std::max_element(rot.begin(), rot.end()));
}

CompareResult compare_presets(const HarnessConfig& config, std::span<const std::uint64_t> seeds,
                              std::span<const RunPreset> presets, const std::filesystem::path& out_dir) {
  // The path is deterministic, so one clean dataset serves every seed.
  const Dataset clean = generate_truth(config.sim).dataset;
  const auto n_seeds = static_cast<long>(seeds.size());
  const std::size_t n_presets = presets.size();
  std::vector<std::vector<std::optional<std::vector<ErrorRecord>>>> results(
      seeds.size(), std::vector<std::optional<std::vector<ErrorRecord>>>(n_presets));

#pragma omp parallel for schedule(dynamic)
  for (long s = 0; s < n_seeds; ++s) {
    const Dataset noisy = corrupt(clean, config.sim.noise, seeds[static_cast<std::size_t>(s)]);
    for (std::size_t p = 0; p < n_presets; ++p) {
      EstimatorConfig est = config.estimator;
      est.preset = presets[p];
      est.solver.execution = Execution::Serial;  // parallelism lives at the seed level
      try {
        RunResult r = run_estimator(noisy, est);
        if (!out_dir.empty()) {
          write_run_outputs(out_dir / ("seed_" + std::to_string(seeds[static_cast<std::size_t>(s)])) /
                                std::string(to_string(presets[p])),
                            r);
        }
        results[static_cast<std::size_t>(s)][p] = std::move(r.errors);
      } catch (const Error&) {
        // Counted as a failure below.
      }
    }
  }

  CompareResult out;
  for (std::size_t p = 0; p < n_presets; ++p) {
    CompareRow row{presets[p]};
    std::vector<ErrorRecord> pooled;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      if (!results[s][p]) {
        ++row.failures;
        continue;
      }
      pooled.insert(pooled.end(), results[s][p]->begin(), results[s][p]->end());
    }
    std::vector<double> trans, rot;
    for (const ErrorRecord& e : pooled) {
      trans.push_back(e.translation);
      rot.push_back(e.rotation);
    }
    row.records = pooled.size();
    if (!pooled.empty()) {
      row.median_translation = median(trans);
      row.median_rotation = median(rot);
    }
    out.rows.push_back(row);
    out.pooled.push_back(std::move(pooled));
  }
  return out;
}

void write_compare_outputs(const std::filesystem::path& dir, const CompareResult& result) {
  std::filesystem::create_directories(dir);
  {
    File out(dir / "compare.txt");
    std::fprintf(out.f, "# preset median_translation_m median_rotation_rad records failures\n");
    for (const CompareRow& row : result.rows) {
      std::fprintf(out.f, "%s %.17g %.17g %zu %zu\n", std::string(to_string(row.preset)).c_str(),
                   row.median_translation, row.median_rotation, row.records, row.failures);
    }
  }
  for (std::size_t p = 0; p < result.rows.size(); ++p) {
    if (result.pooled[p].empty()) continue;
    std::vector<double> trans, rot;
    for (const ErrorRecord& e : result.pooled[p]) {
      trans.push_back(e.translation);
      rot.push_back(e.rotation);
    }
    const std::string name(to_string(result.rows[p].preset));
    write_cdf(dir / ("cdf_trans_" + name + ".txt"), trans);
    write_cdf(dir / ("cdf_rot_" + name + ".txt"), rot);
  }
}

}  // namespace legged
