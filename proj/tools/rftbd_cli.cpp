// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/scenario.hpp"
#include "rftbd/sim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace rftbd;

ResolvabilityReport resolvability(const ScenarioConfig& cfg) {
  return check_resolvability(cfg.sensor().tx, cfg.rx);
}

int cmd_validate(const std::string& path) {
  const ScenarioConfig cfg = load_config(path);
  cfg.validate();
  const ResolvabilityReport report = resolvability(cfg);
  for (const auto& c : report.checks)
    std::printf("%-24s %s  value=%.6g bound=%.6g  %s\n", c.name.c_str(), c.passed ? "ok  " : "FAIL",
                c.value, c.bound, c.detail.c_str());
  std::printf("%s: %zu objects, %d steps, %s planner\n", cfg.name.c_str(), cfg.objects.size(),
              cfg.steps(), std::string(to_string(cfg.planner)).c_str());
  return report.all_passed() ? 0 : 1;
}

int cmd_run(const std::string& path, std::uint64_t seed, bool seed_set, const std::string& out,
            const std::string& planner) {
  ScenarioConfig cfg = load_config(path);
  if (!planner.empty()) cfg.planner = parse_planner_kind(planner);
  if (!seed_set) seed = cfg.seed;
  if (!resolvability(cfg).all_passed())
    std::fprintf(stderr, "warning: receiver settings fail resolvability checks (see validate)\n");
  const RunLog log = run_closed_loop(cfg, seed);
  write_run_outputs(out, cfg, log, seed);
  const RunSummary s = summarize_run(log, cfg.planning.void_threshold);
  std::printf("steps=%d mean_ospa=%.4f final_ospa=%.4f epochs=%d fallback=%d\n", s.steps,
              s.mean_ospa, s.final_ospa, s.epochs, s.fallback_epochs);
  return 0;
}

int cmd_sweep(const std::string& path, int runs, const std::string& grid,
              const std::string& variants, const std::string& out) {
  const ScenarioConfig cfg = load_config(path);
  const std::vector<double> noise = grid.empty() ? std::vector<double>{cfg.rx.noise_cov}
                                                 : parse_noise_grid(grid);
  const auto rows = monte_carlo(cfg, runs, noise, parse_variants(variants));
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    write_sweep_csv(std::filesystem::path(out) / "sweep.csv", rows);
  }
  std::printf("variant,noise_cov,runs,mean_ospa,stderr_ospa,mean_card\n");
  for (const auto& r : rows)
    std::printf("%s,%.6g,%d,%.6f,%.6f,%.6f\n", std::string(to_string(r.variant)).c_str(),
                r.noise_cov, r.runs, r.mean_ospa, r.stderr_ospa, r.mean_card);
  return 0;
}

// Spectrogram of interval k seen from the initial UAV pose.
int cmd_spectrogram(const std::string& path, std::uint64_t seed, bool seed_set, int step,
                    const std::string& out, bool csv) {
  ScenarioConfig cfg = load_config(path);
  if (!seed_set) seed = cfg.seed;
  if (step < 1 || step > cfg.steps()) throw InvalidArgument("step outside the scenario");
  const Rng root(seed);
  Rng truth_rng = root.split(1);
  Rng meas_rng = root.split(2);
  const TruthTrajectory truth = simulate_truth(cfg, truth_rng);
  const double t = step * cfg.period();
  const Spectrogram z =
      observe(truth[step - 1], cfg.uav_start, t - cfg.period(), cfg.sensor(), meas_rng, step);
  if (csv)
    write_spectrogram_csv(out, z);
  else
    write_spectrogram(out, z);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RF emitter search: track-before-detect LMB filter with UAV path planning"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string planner;
  auto* run = app.add_subcommand("run", "one closed-loop run");
  run->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  auto* run_seed = run->add_option("--seed", seed, "RNG seed (default: config seed)");
  run->add_option("--out", out, "output directory");
  run->add_option("--planner", planner, "override planner: renyi, cauchy, straight");

  int runs = 1;
  std::string grid;
  std::string variants = "renyi,cauchy,straight";
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over planners and noise levels");
  sweep->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--runs", runs, "runs per cell")->check(CLI::PositiveNumber);
  sweep->add_option("--noise-grid", grid, "noise covariance grid a:b:step");
  sweep->add_option("--variants", variants, "comma-separated planner variants");
  sweep->add_option("--out", sweep_out, "directory for sweep.csv");

  auto* validate = app.add_subcommand("validate", "schema and resolvability checks");
  validate->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);

  int step = 1;
  bool csv = false;
  std::string spec_out = "spectrogram.bin";
  auto* spec = app.add_subcommand("spectrogram", "dump one interval's spectrogram");
  spec->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  auto* spec_seed = spec->add_option("--seed", seed, "RNG seed (default: config seed)");
  spec->add_option("--step", step, "interval index k >= 1");
  spec->add_option("--out", spec_out, "output file");
  spec->add_flag("--csv", csv, "write CSV instead of the binary dump");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, seed, run_seed->count() > 0, out, planner);
    if (*sweep) return cmd_sweep(config, runs, grid, variants, sweep_out);
    if (*validate) return cmd_validate(config);
    if (*spec) return cmd_spectrogram(config, seed, spec_seed->count() > 0, step, spec_out, csv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
