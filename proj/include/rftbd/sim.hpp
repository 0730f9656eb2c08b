// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Ground-truth simulation and the closed sense-filter-plan-move loop.

#pragma once

#include "rftbd/metrics.hpp"
#include "rftbd/planner.hpp"
#include "rftbd/scenario.hpp"
#include "rftbd/tbd_lmb.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rftbd {

/// Truth states per step: truth[k - 1] holds the objects present at t_k = k T0.
using TruthTrajectory = std::vector<std::vector<ObjectState>>;

/// Mode of an object at time t under its script.
Mode scheduled_mode(const ObjectSpec& spec, double t);

/// Simulates every object over the scenario duration.
TruthTrajectory simulate_truth(const ScenarioConfig& cfg, Rng& rng);

struct StepRecord {
  int step = 0;
  double time = 0.0;
  UavState uav;                          // pose used for this step's measurement
  std::vector<ObjectState> truth;
  std::vector<TrackEstimate> estimates;  // r above the extraction threshold
  std::vector<TrackEstimate> components; // every component
  std::vector<double> cardinality;
  OspaResult ospa;
};

struct RunLog {
  std::vector<StepRecord> steps;
  std::vector<PlanDecision> decisions;
};

struct RunOptions {
  bool keep_components = true;  // per-step summaries of every component
};

RunLog run_closed_loop(const ScenarioConfig& cfg, std::uint64_t seed,
                       const RunOptions& options = {});

struct RunSummary {
  double mean_ospa = 0.0;
  double mean_loc = 0.0;
  double mean_card = 0.0;
  double final_ospa = 0.0;
  int steps = 0;
  int epochs = 0;
  int fallback_epochs = 0;
  int void_violations = 0;  // feasible epochs whose chosen action broke the constraint
};

RunSummary summarize_run(const RunLog& log, double void_threshold);

struct SweepRow {
  PlannerKind variant = PlannerKind::Renyi;
  double noise_cov = 0.0;
  int runs = 0;
  double mean_ospa = 0.0;
  double stderr_ospa = 0.0;
  double mean_card = 0.0;
  std::vector<double> run_ospa;  // per-run scenario means, run i uses seed base + i
};

/// "a:b:step" gives a, a + step, ... up to b; a single number gives itself.
std::vector<double> parse_noise_grid(const std::string& spec);
/// Comma-separated planner names.
std::vector<PlannerKind> parse_variants(const std::string& spec);

/// Runs every (variant, noise level) pair n_runs times.
std::vector<SweepRow> monte_carlo(const ScenarioConfig& cfg, int n_runs,
                                  const std::vector<double>& noise_grid,
                                  const std::vector<PlannerKind>& variants);

/// Writes metrics.csv, trajectory.csv, truth.csv, decisions.csv,
/// belief/<k>.json and summary.json into dir.
void write_run_outputs(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                       const RunLog& log, std::uint64_t seed);

void write_metrics_csv(const std::filesystem::path& path, const RunLog& log);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace rftbd
