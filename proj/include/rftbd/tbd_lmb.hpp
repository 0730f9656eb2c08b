// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Particle labeled multi-Bernoulli track-before-detect filter.

#pragma once

#include "rftbd/belief.hpp"
#include "rftbd/dynamics.hpp"
#include "rftbd/likelihood.hpp"
#include "rftbd/rng.hpp"

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace rftbd {

struct FilterParams {
  int particles = 2000;             // N_s per component
  double extract_threshold = 0.5;   // report labels with r above this
  double prune_threshold = 1e-6;    // drop components below this before births
  double resample_fraction = 0.5;   // resample when ESS < fraction * N_s
  double existence_floor = 1e-12;   // r kept in [floor, 1 - floor]
  /// Post-resampling kernel jitter as a multiple of the Gaussian-optimal
  /// bandwidth; 0 gives the plain bootstrap filter.
  double roughening = 1.0;
};

/// Existence clamped to [floor, 1 - floor].
double clamp_existence(double r, double floor = 1e-12);

/// Survivors: r scaled by p_S and particles propagated. Births are then
/// appended; a birth label that is already live is an error.
LmbBelief predict(const LmbBelief& belief, const JmsModel& model,
                  const std::vector<BernoulliComponent>& births, Rng& rng,
                  Exec exec = Exec::Parallel);

/// Particles propagated only; existence, label set and weights untouched.
LmbBelief predict_motion(const LmbBelief& belief, const JmsModel& model, Rng& rng,
                         Exec exec = Exec::Parallel);

struct ComponentUpdate {
  Label label = 0;
  double log_mean_likelihood = 0.0;  // log <p, g>
  bool collapsed = false;            // every particle had zero likelihood
};

/// Posterior weights w'_i proportional to w_i exp(log_g_i), written to out.
/// Returns log <p, g> = log sum_i w_i exp(log_g_i), or -inf (out untouched)
/// when every term vanishes.
double reweight(std::span<const double> weights, std::span<const double> log_g,
                std::span<double> out);

/// r' = r L / (1 - r + r L) with log L = log_mean_likelihood, clamped.
double updated_existence(double r, double log_mean_likelihood, double floor = 1e-12);

/// Bayes update of every component given its particle log-likelihoods
/// (log_g[i] for particle i). Throws on size mismatch.
ComponentUpdate update_component(BernoulliComponent& c, std::span<const double> log_g,
                                 double existence_floor = 1e-12);

/// Updates every component with the measurement.
std::vector<ComponentUpdate> update(LmbBelief& belief, const Spectrogram& z, const UavState& uav,
                                    const MeasurementModel& model, double existence_floor = 1e-12,
                                    Exec exec = Exec::Parallel);

/// Systematic resampling to the same particle count with equal weights.
void resample(BernoulliComponent& c, Rng& rng);

/// Weighted covariance of the particle kinematics.
Eigen::Matrix4d weighted_covariance(const BernoulliComponent& c);

/// Adds N(0, (scale h)^2 cov) to every particle's kinematics, with h the
/// Gaussian-optimal kernel bandwidth for the component size.
void roughen(BernoulliComponent& c, const Eigen::Matrix4d& cov, double scale, Rng& rng);

/// Resamples components whose ESS dropped below fraction * size, then
/// roughens them with the pre-resampling covariance.
void resample_degenerate(LmbBelief& belief, double fraction, Rng& rng, double roughening = 0.0);

/// P(|X| = n) for n = 0..|labels|.
std::vector<double> cardinality_pmf(const LmbBelief& belief);

struct TrackEstimate {
  Label label = 0;
  double existence = 0.0;
  Kinematics mean = Kinematics::Zero();
  Kinematics variance = Kinematics::Zero();  // diagonal of the weighted covariance
  double tau = 0.0;                          // circular weighted mean
  std::array<double, kModeCount> mode_prob{};

  [[nodiscard]] Mode mode() const;
};

/// Weighted summary of one component.
TrackEstimate summarize(const BernoulliComponent& c, double period);

/// Components with r > threshold, in label order.
std::vector<TrackEstimate> extract_estimate(const LmbBelief& belief, double threshold,
                                            double period);

/// Births for the configured labels that are not live, plus pruning of
/// components below the threshold, bundled with predict/update/resample.
class LmbFilter {
 public:
  LmbFilter(FilterParams params, JmsModel dynamics, std::vector<BirthSpec> births,
            const MeasurementModel& measurement);

  /// One interval: prune, predict with births, update, resample.
  std::vector<ComponentUpdate> step(const Spectrogram& z, const UavState& uav, Rng& rng);

  [[nodiscard]] const LmbBelief& belief() const { return belief_; }
  [[nodiscard]] std::vector<TrackEstimate> estimates() const;
  [[nodiscard]] const FilterParams& params() const { return params_; }
  [[nodiscard]] const JmsModel& dynamics() const { return dynamics_; }
  [[nodiscard]] const MeasurementModel& measurement() const { return *measurement_; }

 private:
  FilterParams params_;
  JmsModel dynamics_;
  std::vector<BirthSpec> births_;
  const MeasurementModel* measurement_;
  LmbBelief belief_;
};

}  // namespace rftbd
