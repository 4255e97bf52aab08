// legged_cli: generate simulated walks, run the smoother, compare presets.
//
//   legged_cli generate --config cfg.txt --out walk.txt [--noiseless] [--seed N]
//   legged_cli run --dataset walk.txt --config cfg.txt --preset all --out dir
//   legged_cli compare --config cfg.txt --seeds 20 --out dir
//
// Exit codes: 0 success, 1 other error, 2 parse error, 3 solver failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>

#include "legged/error.hpp"
#include "legged/experiment/config.hpp"
#include "legged/experiment/dataset_io.hpp"
#include "legged/experiment/pipeline.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;

legged::HarnessConfig config_or_default(const std::string& path) {
  return path.empty() ? legged::HarnessConfig{} : legged::load_config(path);
}

bool is_solver_error(legged::ErrorCode c) {
  using legged::ErrorCode;
  return c == ErrorCode::NotAnchored || c == ErrorCode::LinearSolveFailure ||
         c == ErrorCode::SingularCovariance || c == ErrorCode::AngleAtPi;
}

void flag_failure(const std::filesystem::path& dir, const std::string& preset, const std::string& what) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "summary.txt", std::ios::binary);
  out << "status = failed\npreset = " << preset << "\nerror = " << what << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor-graph smoother for legged robots: simulate, estimate, compare."};
  app.require_subcommand(1);

  std::string config_path, out_path, dataset_path, preset_name = "all";
  bool noiseless = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int seed_count = 20;
  std::uint64_t first_seed = 1;
  bool dump_config = false;

  auto* gen = app.add_subcommand("generate", "Simulate a walk and write a dataset file");
  gen->add_option("-c,--config", config_path, "Harness config file");
  gen->add_option("-o,--out", out_path, "Dataset file to write")->required();
  gen->add_flag("--noiseless", noiseless, "Skip measurement corruption");
  gen->add_option("-s,--seed", seed, "Noise seed (overrides [sim] seed)")
      ->each([&](const std::string&) { seed_given = true; });

  auto* run = app.add_subcommand("run", "Estimate a trajectory from a dataset");
  run->add_option("-d,--dataset", dataset_path, "Dataset file")->required();
  run->add_option("-c,--config", config_path, "Harness config file");
  run->add_option("-p,--preset", preset_name, "imu_only | imu_lc | imu_contact_fk | all");
  run->add_option("-o,--out", out_path, "Output directory")->required();

  auto* cmp = app.add_subcommand("compare", "Run every preset over several noise seeds");
  cmp->add_option("-c,--config", config_path, "Harness config file");
  cmp->add_option("-n,--seeds", seed_count, "Number of seeds")->check(CLI::PositiveNumber);
  cmp->add_option("--first-seed", first_seed, "First seed of the sweep");
  cmp->add_option("-o,--out", out_path, "Output directory")->required();

  auto* cfg = app.add_subcommand("config", "Print the effective config");
  cfg->add_option("-c,--config", config_path, "Harness config file");
  cfg->callback([&] { dump_config = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    legged::HarnessConfig config = config_or_default(config_path);

    if (dump_config) {
      legged::write_config(std::cout, config);
      return 0;
    }

    if (*gen) {
      if (seed_given) config.sim.seed = seed;
      legged::Dataset data = legged::generate_truth(config.sim).dataset;
      if (!noiseless) data = legged::corrupt(data, config.sim.noise, config.sim.seed);
      legged::save_dataset(out_path, data);
      std::printf("wrote %zu IMU samples, %zu contact events, %zu nodes to %s\n", data.imu.size(),
                  data.contacts.size(), data.truth.size(), out_path.c_str());
      return 0;
    }

    if (*run) {
      config.estimator.preset = legged::parse_preset(preset_name);
      const legged::Dataset data = legged::load_dataset(dataset_path);
      try {
        const legged::RunResult result = legged::run_estimator(data, config.estimator);
        legged::write_run_outputs(out_path, result);
        std::printf("%s: %zu nodes, cost %.6g -> %.6g in %d iterations (%s), %.3f s\n", preset_name.c_str(),
                    result.estimate.size(), result.solve.initial_cost, result.solve.final_cost,
                    result.solve.iterations, result.solve.termination.c_str(), result.wall_seconds);
      } catch (const legged::Error& e) {
        if (!is_solver_error(e.code())) throw;
        flag_failure(out_path, preset_name, e.what());
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kExitSolver;
      }
      return 0;
    }

    if (*cmp) {
      std::vector<std::uint64_t> seeds(static_cast<std::size_t>(seed_count));
      std::iota(seeds.begin(), seeds.end(), first_seed);
      const std::vector<legged::RunPreset> presets{legged::RunPreset::ImuOnly, legged::RunPreset::ImuLc,
                                                   legged::RunPreset::ImuContactFk, legged::RunPreset::All};
      const auto result = legged::compare_presets(config, seeds, presets, out_path);
      legged::write_compare_outputs(out_path, result);
      std::printf("%-16s %14s %14s %8s %8s\n", "preset", "median_trans", "median_rot", "records", "failed");
      for (const auto& row : result.rows) {
        std::printf("%-16s %14.6g %14.6g %8zu %8zu\n", std::string(legged::to_string(row.preset)).c_str(),
                    row.median_translation, row.median_rotation, row.records, row.failures);
      }
      return 0;
    }
  } catch (const legged::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == legged::ErrorCode::ParseError ? kExitParse : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
