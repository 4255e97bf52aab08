#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "legged/error.hpp"
#include "legged/experiment/config.hpp"
#include "legged/experiment/dataset_io.hpp"
#include "legged/experiment/metrics.hpp"
#include "legged/experiment/pipeline.hpp"

namespace legged {
namespace {

namespace fs = std::filesystem;

HarnessConfig short_config(double duration = 10.0) {
  HarnessConfig cfg;
  cfg.sim.duration = duration;
  return cfg;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("legged_experiment_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- config

TEST(Config, ParsesOverrides) {
  std::istringstream in(
      "# comment\n"
      "[sim]\nduration = 12.5\nseed = 9\n\n"
      "[noise]\nencoder = 0.02\n"
      "[run]\npreset = imu_lc\ncontact_kind = point\n");
  const HarnessConfig cfg = parse_config(in);
  EXPECT_EQ(cfg.sim.duration, 12.5);
  EXPECT_EQ(cfg.sim.seed, 9u);
  EXPECT_EQ(cfg.sim.noise.encoder, 0.02);
  EXPECT_EQ(cfg.estimator.noise.encoder, 0.02);
  EXPECT_EQ(cfg.estimator.preset, RunPreset::ImuLc);
  EXPECT_EQ(cfg.estimator.contact_kind, ContactKind::Point);
  EXPECT_EQ(cfg.sim.noise.gyro, NoiseConfig{}.gyro);
}

TEST(Config, WriteThenParseRoundTrips) {
  HarnessConfig cfg = short_config(7.0);
  cfg.sim.noise.lc_translation = 0.123456789;
  cfg.estimator.noise = cfg.sim.noise;
  cfg.estimator.prior.velocity = 0.3;
  cfg.estimator.solver.max_iterations = 17;
  cfg.estimator.preset = RunPreset::ImuContactFk;
  std::ostringstream first;
  write_config(first, cfg);
  std::istringstream in(first.str());
  const HarnessConfig back = parse_config(in);
  std::ostringstream second;
  write_config(second, back);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(back.sim.noise.lc_translation, 0.123456789);
  EXPECT_EQ(back.estimator.solver.max_iterations, 17);
}

TEST(Config, ErrorsCarryLineNumbers) {
  const std::pair<std::string, std::size_t> cases[] = {
      {"[sim]\nduration = 5\nbogus = 1\n", 3},
      {"[nowhere]\n", 1},
      {"[sim]\n\nduration = abc\n", 3},
      {"[run]\npreset = fastest\n", 2},
      {"[noise]\ngyro\n", 2},
  };
  for (const auto& [text, line] : cases) {
    std::istringstream in(text);
    try {
      parse_config(in);
      FAIL() << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
    }
  }
  std::istringstream negative("[noise]\ngyro = -1\n");
  EXPECT_THROW(parse_config(negative), ParseError);
  EXPECT_THROW(load_config("/nonexistent/legged.cfg"), ParseError);
}

TEST(Config, PresetNames) {
  for (RunPreset p : {RunPreset::ImuOnly, RunPreset::ImuLc, RunPreset::ImuContactFk, RunPreset::All}) {
    EXPECT_EQ(parse_preset(to_string(p)), p);
  }
  EXPECT_THROW(parse_preset("everything"), Error);
}

// ---------------------------------------------------------------- dataset I/O

TEST(DatasetIo, RoundTripIsBitExact) {
  HarnessConfig cfg = short_config(3.0);
  const Dataset d = corrupt(generate_truth(cfg.sim).dataset, cfg.sim.noise, 4);
  std::ostringstream out;
  write_dataset(out, d);
  std::istringstream in(out.str());
  const Dataset back = read_dataset(in);
  ASSERT_EQ(back.imu.size(), d.imu.size());
  for (std::size_t k = 0; k < d.imu.size(); ++k) {
    ASSERT_EQ(back.imu[k].timestamp, d.imu[k].timestamp);
    ASSERT_EQ(back.imu[k].gyro, d.imu[k].gyro);
    ASSERT_EQ(back.imu[k].accel, d.imu[k].accel);
  }
  ASSERT_EQ(back.loop_closures.size(), d.loop_closures.size());
  for (std::size_t m = 0; m < d.loop_closures.size(); ++m) {
    ASSERT_EQ(back.loop_closures[m].measured.rotation.matrix(), d.loop_closures[m].measured.rotation.matrix());
    ASSERT_EQ(back.loop_closures[m].covariance, d.loop_closures[m].covariance);
  }
  std::ostringstream again;
  write_dataset(again, back);
  EXPECT_EQ(out.str(), again.str());
}

TEST(DatasetIo, ReportsBadLines) {
  std::istringstream unknown("IMU 0 0 0 9.81 0 0 0\nXYZ 1 2 3\n");
  try {
    read_dataset(unknown);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream backwards("IMU 1 0 0 9.81 0 0 0\nIMU 0.5 0 0 9.81 0 0 0\n");
  try {
    read_dataset(backwards);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load_dataset("/nonexistent/data.txt"), ParseError);
}

// ---------------------------------------------------------------- metrics

std::vector<StampedPose> straight_line(std::size_t n) {
  std::vector<StampedPose> poses(n);
  for (std::size_t i = 0; i < n; ++i) poses[i] = {static_cast<double>(i), Rotation(), Vec3(static_cast<double>(i), 0, 0)};
  return poses;
}

TEST(Metrics, IdenticalTrajectoriesHaveZeroError) {
  const auto t = straight_line(5);
  const auto e = compute_relative_errors(t, t);
  ASSERT_EQ(e.size(), 4u);
  for (std::size_t i = 0; i < e.size(); ++i) {
    EXPECT_EQ(e[i].node, i + 1);
    EXPECT_EQ(e[i].translation, 0.0);
    EXPECT_EQ(e[i].rotation, 0.0);
  }
}

TEST(Metrics, GlobalTransformDoesNotChangeErrors) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  auto truth = straight_line(6), estimate = truth;
  for (auto& p : estimate) {
    p.p += 0.01 * Vec3(n(rng), n(rng), n(rng));
    p.R = p.R * exp_so3(0.01 * Vec3(n(rng), n(rng), n(rng)));
  }
  auto moved = estimate;
  const Rotation g = exp_so3(Vec3(0.3, -1.0, 2.0));
  for (auto& p : moved) {
    p.R = g * p.R;
    p.p = g * p.p + Vec3(5, -2, 1);
  }
  const auto a = compute_relative_errors(estimate, truth), b = compute_relative_errors(moved, truth);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].translation, b[i].translation, 1e-12);
    EXPECT_NEAR(a[i].rotation, b[i].rotation, 1e-12);
  }
}

TEST(Metrics, LocalYawErrorTouchesAdjacentPairsOnly) {
  const auto truth = straight_line(5);
  auto estimate = truth;
  estimate[2].R = Rotation::about_z(0.1);
  const auto e = compute_relative_errors(estimate, truth);
  EXPECT_EQ(e[0].rotation, 0.0);
  EXPECT_NEAR(e[1].rotation, 0.1, 1e-12);
  EXPECT_NEAR(e[2].rotation, 0.1, 1e-12);
  EXPECT_EQ(e[3].rotation, 0.0);
  EXPECT_EQ(e[1].translation, 0.0);
  EXPECT_GT(e[2].translation, 0.0);  // the rotated frame sees the next step sideways
}

TEST(Metrics, RejectsMismatchedInputs) {
  const auto a = straight_line(4);
  auto b = a;
  b[2].timestamp += 1e-6;
  try {
    compute_relative_errors(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TimestampMismatch);
  }
  try {
    compute_relative_errors(std::span(a).first(3), a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TimestampMismatch);
  }
  try {
    compute_relative_errors(std::span(a).first(1), std::span(a).first(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(Metrics, CdfExamples) {
  const std::vector<double> ones{1, 1, 1};
  const auto c1 = compute_cdf(ones);
  ASSERT_EQ(c1.size(), 1u);
  EXPECT_EQ(c1[0].threshold, 1.0);
  EXPECT_EQ(c1[0].fraction, 1.0);

  const std::vector<double> four{1, 2, 3, 4};
  const auto c4 = compute_cdf(four);
  ASSERT_EQ(c4.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(c4[i].threshold, static_cast<double>(i + 1));
    EXPECT_DOUBLE_EQ(c4[i].fraction, 0.25 * static_cast<double>(i + 1));
  }
  EXPECT_DOUBLE_EQ(median({1, 2, 3, 4}), 2.5);
  EXPECT_THROW(compute_cdf(std::vector<double>{}), Error);
}

TEST(Metrics, CdfIgnoresOrder) {
  std::mt19937_64 rng(2);
  std::vector<double> v(200);
  std::uniform_int_distribution<int> u(0, 30);
  for (double& x : v) x = u(rng) * 0.1;
  const auto base = compute_cdf(v);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(v.begin(), v.end(), rng);
    const auto c = compute_cdf(v);
    ASSERT_EQ(c.size(), base.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_EQ(c[i].threshold, base[i].threshold);
      EXPECT_EQ(c[i].fraction, base[i].fraction);
    }
    EXPECT_TRUE(std::is_sorted(c.begin(), c.end(), [](auto& a, auto& b) { return a.fraction < b.fraction; }));
  }
}

// ---------------------------------------------------------------- pipeline

TEST(Pipeline, NoiselessAllRecoversTruth) {
  HarnessConfig cfg = short_config();
  const Dataset d = generate_truth(cfg.sim).dataset;
  const RunResult r = run_estimator(d, cfg.estimator);
  const auto truth = truth_poses(d);
  ASSERT_EQ(r.estimate.size(), truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    EXPECT_LT((r.estimate[i].p - truth[i].p).norm(), 1e-6);
    EXPECT_LT(log_so3(truth[i].R.inverse() * r.estimate[i].R).norm(), 1e-8);
  }
}

TEST(Pipeline, ProblemLayoutFollowsPreset) {
  HarnessConfig cfg = short_config();
  const Dataset d = generate_truth(cfg.sim).dataset;
  for (RunPreset p : {RunPreset::ImuOnly, RunPreset::ImuLc, RunPreset::ImuContactFk, RunPreset::All}) {
    cfg.estimator.preset = p;
    const Problem prob = build_problem(d, cfg.estimator);
    EXPECT_EQ(prob.initial.size(), d.truth.size());
    EXPECT_EQ(prob.graph.count(FactorKind::Prior), 1u);
    EXPECT_EQ(prob.graph.count(FactorKind::Imu), d.truth.size() - 1);
    EXPECT_EQ(prob.graph.count(FactorKind::RelativePose) > 0, uses_loop_closures(p));
    EXPECT_EQ(prob.graph.count(FactorKind::ForwardKinematic) > 0, uses_contacts(p));
    EXPECT_EQ(prob.graph.count(FactorKind::RigidContact) > 0, uses_contacts(p));
    if (!uses_contacts(p)) {
      for (const NavState& s : prob.initial.states()) EXPECT_EQ(s.contact_count(), 0);
    }
  }
  cfg.estimator.preset = RunPreset::All;
  cfg.estimator.contact_kind = ContactKind::Point;
  const Problem point = build_problem(d, cfg.estimator);
  EXPECT_EQ(point.graph.count(FactorKind::RigidContact), 0u);
  EXPECT_GT(point.graph.count(FactorKind::PointContact), 0u);
}

TEST(Pipeline, AllBeatsImuOnlyOnNoisyData) {
  HarnessConfig cfg = short_config(20.0);
  const Dataset d = corrupt(generate_truth(cfg.sim).dataset, cfg.sim.noise, 7);
  auto median_translation = [&](RunPreset p) {
    cfg.estimator.preset = p;
    const RunResult r = run_estimator(d, cfg.estimator);
    std::vector<double> t;
    for (const auto& e : r.errors) t.push_back(e.translation);
    return median(t);
  };
  EXPECT_LT(median_translation(RunPreset::All), median_translation(RunPreset::ImuOnly));
}

// A yaw about gravity plus a shift of the first truth record moves the prior
// and the dead-reckoned start; every measurement is relative, so the optimum
// cost must not move.
TEST(Pipeline, FinalCostIsGaugeInvariant) {
  HarnessConfig cfg = short_config(6.0);
  const Dataset d = corrupt(generate_truth(cfg.sim).dataset, cfg.sim.noise, 3);
  Dataset moved = d;
  const Rotation yaw = Rotation::about_z(0.7);
  for (TruthState& s : moved.truth) {
    s.R = yaw * s.R;
    s.p = yaw * s.p + Vec3(3.0, -1.0, 0.5);
    s.v = yaw * s.v;
  }
  const RunResult a = run_estimator(d, cfg.estimator);
  const RunResult b = run_estimator(moved, cfg.estimator);
  EXPECT_NEAR(a.solve.final_cost, b.solve.final_cost, 1e-9 * std::max(1.0, a.solve.final_cost));
}

TEST(Pipeline, OutputsAreDeterministic) {
  HarnessConfig cfg = short_config(4.0);
  const Dataset d = corrupt(generate_truth(cfg.sim).dataset, cfg.sim.noise, 2);
  const fs::path one = scratch("one"), two = scratch("two");
  write_run_outputs(one, run_estimator(d, cfg.estimator));
  write_run_outputs(two, run_estimator(d, cfg.estimator));
  for (const char* name : {"trajectory.txt", "errors.txt", "cdf_trans.txt", "cdf_rot.txt", "summary.txt"}) {
    const std::string a = read_file(one / name);
    EXPECT_FALSE(a.empty()) << name;
    EXPECT_EQ(a, read_file(two / name)) << name;
  }
  fs::remove_all(one);
  fs::remove_all(two);
}

TEST(Pipeline, CompareIsDeterministicAcrossThreads) {
  HarnessConfig cfg = short_config(4.0);
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const std::vector<RunPreset> presets{RunPreset::ImuOnly, RunPreset::All};
  const CompareResult a = compare_presets(cfg, seeds, presets);
  const CompareResult b = compare_presets(cfg, seeds, presets);
  ASSERT_EQ(a.rows.size(), 2u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].median_translation, b.rows[i].median_translation);
    EXPECT_EQ(a.rows[i].median_rotation, b.rows[i].median_rotation);
    EXPECT_EQ(a.rows[i].failures, 0u);
    EXPECT_EQ(a.rows[i].records, a.pooled[i].size());
  }
}

}  // namespace
}  // namespace legged
