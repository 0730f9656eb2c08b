// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Jump-Markov single-object dynamics. Kinematics follow a linear Gaussian
// model chosen by the mode (wandering or constant velocity), the mode is a
// first-order Markov chain, the pulse offset drifts as a wrapped random walk
// and the label never changes.

#pragma once

#include "rftbd/belief.hpp"
#include "rftbd/rng.hpp"
#include "rftbd/types.hpp"

#include <Eigen/Core>

#include <array>
#include <set>
#include <vector>

namespace rftbd {

/// Constant velocity transition over dt in [p_x, v_x, p_y, v_y] order.
Eigen::Matrix4d cv_transition(double dt);
/// White-noise-acceleration covariance sigma^2 [[dt^3/3, dt^2/2], [dt^2/2, dt]] per axis.
Eigen::Matrix4d cv_process_cov(double sigma, double dt);
/// Wandering: position kept, velocity discarded.
Eigen::Matrix4d wd_transition();
/// diag(pos_var, vel_var, pos_var, vel_var).
Eigen::Matrix4d wd_process_cov(double pos_var, double vel_var);

struct JmsParams {
  double period = 1.0;            // T0, seconds per step
  double cv_sigma = 0.05;         // m/s^(3/2)
  double wd_pos_var = 0.25;       // m^2
  double wd_vel_var = 2.25;       // (m/s)^2
  double mode_stay = 0.99;        // t(s | s)
  double tau_sigma = 0.002;       // fraction of the period per step
  double survival = 0.99;         // p_S
};

/// Per-mode linear Gaussian models plus mode chain and offset drift.
class JmsModel {
 public:
  explicit JmsModel(const JmsParams& p = {});
  JmsModel(double period, std::array<Eigen::Matrix4d, kModeCount> transition,
           std::array<Eigen::Matrix4d, kModeCount> process_cov,
           const Eigen::Matrix2d& mode_transition, double tau_sd, double survival);

  [[nodiscard]] double period() const { return period_; }
  [[nodiscard]] double survival() const { return survival_; }
  [[nodiscard]] double tau_sd() const { return tau_sd_; }
  [[nodiscard]] const Eigen::Matrix4d& transition(Mode m) const { return f_[mode_index(m)]; }
  [[nodiscard]] const Eigen::Matrix4d& process_cov(Mode m) const { return q_[mode_index(m)]; }
  /// Row = current mode, column = next mode.
  [[nodiscard]] const Eigen::Matrix2d& mode_transition() const { return t_; }

  /// One step: kinematics move under the current mode, then the mode jumps,
  /// then the offset drifts and wraps into [0, T0).
  [[nodiscard]] Particle propagate(const Particle& p, Rng& rng) const;

  [[nodiscard]] Mode sample_next_mode(Mode m, Rng& rng) const;

 private:
  void validate() const;

  double period_ = 1.0;
  std::array<Eigen::Matrix4d, kModeCount> f_;
  std::array<Eigen::Matrix4d, kModeCount> q_;
  std::array<Eigen::Matrix4d, kModeCount> q_sqrt_;
  Eigen::Matrix2d t_;
  double tau_sd_ = 0.0;
  double survival_ = 1.0;
};

/// Free-function form of JmsModel::propagate.
inline Particle propagate_particle(const Particle& p, const JmsModel& model, Rng& rng) {
  return model.propagate(p, rng);
}

/// tau wrapped into [0, period).
double wrap_offset(double tau, double period);

/// Symmetric square root B with B B^T = cov (eigen decomposition, so
/// semidefinite covariances are accepted).
Eigen::Matrix4d covariance_sqrt(const Eigen::Matrix4d& cov);

struct BirthSpec {
  Label label = 0;
  double existence = 1e-6;
  Kinematics mean = Kinematics::Zero();
  Eigen::Matrix4d cov = Eigen::Vector4d(100.0, 4.0, 100.0, 4.0).asDiagonal();
  std::array<double, kModeCount> mode_prob{0.5, 0.5};
  /// Offset prior: uniform on [0, T0) when tau_sd <= 0, else wrapped normal.
  double tau_mean = 0.0;
  double tau_sd = 0.0;
};

/// New Bernoulli components for the given birth specs, each with n equally
/// weighted particles. Throws if a birth label is already live.
std::vector<BernoulliComponent> spawn_births(const std::vector<BirthSpec>& births,
                                             const std::set<Label>& live_labels, int n_particles,
                                             double period, Rng& rng);

}  // namespace rftbd
