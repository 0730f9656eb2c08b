// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Receding-horizon UAV path planner. Candidate heading sequences are scored
// by the divergence between predicted beliefs and their updates with
// noise-free predicted measurements, subject to a void-probability safety
// constraint around every waypoint.

#pragma once

#include "rftbd/belief.hpp"
#include "rftbd/dynamics.hpp"
#include "rftbd/likelihood.hpp"
#include "rftbd/rng.hpp"
#include "rftbd/tbd_lmb.hpp"

#include <span>
#include <string>
#include <vector>

namespace rftbd {

/// Axis-aligned flight region.
struct Region {
  double x_min = 0.0;
  double x_max = 1500.0;
  double y_min = 0.0;
  double y_max = 1500.0;

  [[nodiscard]] Eigen::Vector2d clamp(const Eigen::Vector2d& p) const;
  [[nodiscard]] bool contains(const Eigen::Vector2d& p, double slack = 0.0) const;
};

struct UavKinematics {
  double speed = 20.0;               // m/s
  double max_turn_rate = kPi / 3.0;  // rad/s
};

/// Advances the UAV by dt at constant speed while turning at turn_rate; the
/// heading changes first, then the position moves along it and is clamped to
/// the region.
UavState advance_uav(const UavState& u, double turn_rate, double speed, double dt,
                     const Region& region);

enum class DivergenceKind { Renyi, CauchySchwarz };
enum class PlannerKind { Renyi, CauchySchwarz, Straight };

std::string_view to_string(PlannerKind k);
PlannerKind parse_planner_kind(std::string_view s);

enum class PimsEstimate { Extracted, Sampled };

struct PlannerConfig {
  DivergenceKind divergence = DivergenceKind::Renyi;
  double alpha = 0.5;            // Renyi order
  double kernel_volume = 1.0;    // K in the Cauchy-Schwarz inner product
  int horizon = 3;               // H
  double plan_interval = 5.0;    // N_p, seconds
  double discount = 1.0;         // gamma
  double void_threshold = 0.9;   // P_vmin
  double void_radius = 50.0;     // r_min, m
  int heading_grid = 5;          // heading deltas per step
  double extract_threshold = 0.5;
  double min_existence = 1e-3;   // labels below this are left out of rewards
  PimsEstimate pims = PimsEstimate::Extracted;

  void validate() const;
};

struct ActionSequence {
  std::vector<double> heading_deltas;  // per planning step, radians
  std::vector<UavState> waypoints;     // pose at the end of each planning step
  int clipped_moves = 0;               // moves shortened by the region boundary

  [[nodiscard]] double total_turn() const;
};

/// Every sequence over the symmetric heading-delta grid, in lexicographic
/// order of grid indices.
std::vector<ActionSequence> enumerate_actions(const UavState& u, const PlannerConfig& cfg,
                                              const UavKinematics& kin, const Region& region,
                                              double period);

/// Existence and weights of one label, sharing particles with a reference
/// belief.
struct WeightedLabel {
  double existence = 0.0;
  std::span<const double> weights;
};

/// Renyi divergence of order alpha between two LMB densities on shared
/// particles, factorized over labels. alpha = 1 gives the KL divergence.
double renyi_divergence(std::span<const WeightedLabel> p2, std::span<const WeightedLabel> p1,
                        double alpha);
double renyi_divergence(const LmbBelief& p2, const LmbBelief& p1, double alpha);

/// log <p_i, p_j>_K on shared particles.
double log_cs_inner_product(std::span<const WeightedLabel> pi, std::span<const WeightedLabel> pj,
                            double kernel_volume);
/// Cauchy-Schwarz divergence; throws NumericalError on a zero inner product.
double cauchy_schwarz_divergence(std::span<const WeightedLabel> p2,
                                 std::span<const WeightedLabel> p1, double kernel_volume);
double cauchy_schwarz_divergence(const LmbBelief& p2, const LmbBelief& p1, double kernel_volume);

/// Probability that no object lies within `radius` (ground distance) of center.
double void_probability(const LmbBelief& belief, const Eigen::Vector2d& center, double radius);

/// Belief predicted `steps` intervals ahead under motion only.
LmbBelief predict_chain_step(const LmbBelief& belief, const JmsModel& model, int steps, Rng& rng);

/// Predicted beliefs at each planning step of the horizon (motion only).
std::vector<LmbBelief> prediction_chain(const LmbBelief& belief, const JmsModel& model,
                                        const PlannerConfig& cfg, Rng& rng);

struct PimsStep {
  LmbBelief predicted;
  LmbBelief pseudo_posterior;
  Spectrogram ideal;
  double reward = 0.0;
  double void_prob = 1.0;
};

/// Full rollout of one action over a prediction chain, returning the beliefs
/// (for inspection and tests).
std::vector<PimsStep> pims_rollout(const std::vector<LmbBelief>& chain,
                                   const std::vector<std::vector<ObjectState>>& ideal_objects,
                                   const ActionSequence& action, const MeasurementModel& model,
                                   const PlannerConfig& cfg);

struct ActionScore {
  double reward = 0.0;              // discounted sum
  double min_void = 1.0;            // over the horizon
  std::vector<double> step_rewards;
  std::vector<double> step_voids;
  [[nodiscard]] bool feasible(double threshold) const { return min_void > threshold; }
};

struct PlanDecision {
  double time = 0.0;
  std::vector<ActionSequence> actions;
  std::vector<ActionScore> scores;
  std::size_t chosen = 0;
  bool fallback = false;  // no action met the void constraint
};

/// Chooses among scored actions: the feasible argmax of reward with ties
/// broken by fewer boundary-clipped moves, then total turn, then index;
/// without feasible actions, the maximum of min_void (flagged).
std::size_t select_action(std::span<const ActionSequence> actions,
                          std::span<const ActionScore> scores, double void_threshold,
                          bool* fallback = nullptr);

class PathPlanner {
 public:
  PathPlanner(PlannerConfig cfg, UavKinematics kin, Region region, const JmsModel& dynamics,
              const MeasurementModel& measurement);

  /// Scores every candidate action for the current belief and picks one.
  PlanDecision plan(const LmbBelief& belief, const UavState& uav, double time, Rng& rng,
                    Exec exec = Exec::Parallel) const;

  /// Scores of the given actions over a precomputed chain.
  std::vector<ActionScore> score_actions(const std::vector<LmbBelief>& chain,
                                         const std::vector<std::vector<ObjectState>>& ideal,
                                         std::span<const ActionSequence> actions,
                                         Exec exec = Exec::Parallel) const;

  /// Objects used to synthesize ideal measurements at each chain step.
  std::vector<std::vector<ObjectState>> ideal_objects(const std::vector<LmbBelief>& chain,
                                                      Rng& rng) const;

  [[nodiscard]] const PlannerConfig& config() const { return cfg_; }

 private:
  PlannerConfig cfg_;
  UavKinematics kin_;
  Region region_;
  const JmsModel* dynamics_;
  const MeasurementModel* measurement_;
};

/// Baseline that flies back and forth along the region diagonal, turning
/// toward the current corner no faster than the turn-rate limit.
class StraightPathController {
 public:
  StraightPathController(UavKinematics kin, Region region);

  /// Turn rate to apply for the next interval of length dt.
  double turn_rate(const UavState& u, double dt);

  [[nodiscard]] const Eigen::Vector2d& target() const { return target_; }

 private:
  UavKinematics kin_;
  Region region_;
  Eigen::Vector2d target_;
};

}  // namespace rftbd
