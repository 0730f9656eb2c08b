// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace rftbd {

namespace {

Kinematics standard_normal4(Rng& rng) {
  Kinematics v;
  for (int i = 0; i < 4; ++i) v[i] = rng.normal();
  return v;
}

bool is_psd(const Eigen::Matrix4d& m) {
  if (!m.allFinite() || !m.isApprox(m.transpose(), 1e-12)) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

}  // namespace

Eigen::Matrix4d cv_transition(double dt) {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 1) = dt;
  f(2, 3) = dt;
  return f;
}

Eigen::Matrix4d cv_process_cov(double sigma, double dt) {
  if (!(sigma > 0.0) || !(dt > 0.0)) throw InvalidArgument("cv_process_cov: sigma and dt must be positive");
  Eigen::Matrix2d block;
  block << dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt;
  Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
  q.block<2, 2>(0, 0) = block;
  q.block<2, 2>(2, 2) = block;
  return sigma * sigma * q;
}

Eigen::Matrix4d wd_transition() { return Eigen::Vector4d(1.0, 0.0, 1.0, 0.0).asDiagonal(); }

Eigen::Matrix4d wd_process_cov(double pos_var, double vel_var) {
  if (pos_var < 0.0 || vel_var < 0.0) throw InvalidArgument("wd_process_cov: negative variance");
  return Eigen::Vector4d(pos_var, vel_var, pos_var, vel_var).asDiagonal();
}

Eigen::Matrix4d covariance_sqrt(const Eigen::Matrix4d& cov) {
  if (!is_psd(cov)) throw InvalidArgument("covariance is not symmetric positive semidefinite");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(cov);
  const Eigen::Vector4d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

double wrap_offset(double tau, double period) {
  double r = std::fmod(tau, period);
  if (r < 0.0) r += period;
  if (r >= period) r = 0.0;
  return r;
}

JmsModel::JmsModel(const JmsParams& p)
    : JmsModel(p.period, {wd_transition(), cv_transition(p.period)},
               {wd_process_cov(p.wd_pos_var, p.wd_vel_var), cv_process_cov(p.cv_sigma, p.period)},
               (Eigen::Matrix2d() << p.mode_stay, 1.0 - p.mode_stay, 1.0 - p.mode_stay, p.mode_stay)
                   .finished(),
               p.tau_sigma * p.period, p.survival) {}

JmsModel::JmsModel(double period, std::array<Eigen::Matrix4d, kModeCount> transition,
                   std::array<Eigen::Matrix4d, kModeCount> process_cov,
                   const Eigen::Matrix2d& mode_transition, double tau_sd, double survival)
    : period_(period), f_(transition), q_(process_cov), t_(mode_transition), tau_sd_(tau_sd),
      survival_(survival) {
  validate();
  for (int m = 0; m < kModeCount; ++m) q_sqrt_[m] = covariance_sqrt(q_[m]);
}

void JmsModel::validate() const {
  if (!(period_ > 0.0)) throw InvalidArgument("dynamics: period must be positive");
  if (!(survival_ > 0.0 && survival_ <= 1.0)) throw InvalidArgument("dynamics: survival must lie in (0, 1]");
  if (!(tau_sd_ >= 0.0)) throw InvalidArgument("dynamics: offset noise must be non-negative");
  for (int r = 0; r < kModeCount; ++r) {
    if ((t_.row(r).array() < 0.0).any() || std::abs(t_.row(r).sum() - 1.0) > 1e-12)
      throw InvalidArgument("dynamics: mode transition rows must be probability vectors");
    if (!f_[r].allFinite()) throw InvalidArgument("dynamics: non-finite transition matrix");
  }
}

Mode JmsModel::sample_next_mode(Mode m, Rng& rng) const {
  const double u = rng.uniform();
  return u < t_(mode_index(m), 0) ? Mode::Wandering : Mode::ConstantVelocity;
}

Particle JmsModel::propagate(const Particle& p, Rng& rng) const {
  const int s = mode_index(p.mode);
  Particle out;
  out.x = f_[s] * p.x + q_sqrt_[s] * standard_normal4(rng);
  out.mode = sample_next_mode(p.mode, rng);
  const double drift = tau_sd_ > 0.0 ? tau_sd_ * rng.normal() : 0.0;
  out.tau = wrap_offset(p.tau + drift, period_);
  return out;
}

std::vector<BernoulliComponent> spawn_births(const std::vector<BirthSpec>& births,
                                             const std::set<Label>& live_labels, int n_particles,
                                             double period, Rng& rng) {
  if (n_particles < 1) throw InvalidArgument("spawn_births: need at least one particle");
  std::vector<BernoulliComponent> out;
  std::set<Label> seen;
  for (const auto& b : births) {
    if (live_labels.contains(b.label) || !seen.insert(b.label).second)
      throw InvalidArgument("spawn_births: label " + std::to_string(b.label) + " already live");
    if (!(b.existence > 0.0 && b.existence < 1.0))
      throw InvalidArgument("spawn_births: existence must lie in (0, 1)");
    const Eigen::Matrix4d root = covariance_sqrt(b.cov);
    BernoulliComponent c;
    c.label = b.label;
    c.existence = b.existence;
    c.particles.resize(n_particles);
    c.weights.assign(n_particles, 1.0 / n_particles);
    for (auto& p : c.particles) {
      p.x = b.mean + root * standard_normal4(rng);
      p.mode = rng.uniform() < b.mode_prob[0] ? Mode::Wandering : Mode::ConstantVelocity;
      p.tau = b.tau_sd > 0.0 ? wrap_offset(b.tau_mean + b.tau_sd * rng.normal(), period)
                             : wrap_offset(rng.uniform() * period, period);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace rftbd
