// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/tbd_lmb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rftbd {

namespace {

void propagate_component(BernoulliComponent& c, const JmsModel& model, const Rng& root,
                         Exec exec) {
  const Rng stream = root.split(static_cast<std::uint64_t>(static_cast<std::int64_t>(c.label)));
  const auto n = static_cast<std::ptrdiff_t>(c.particles.size());
  auto body = [&](std::ptrdiff_t i) {
    Rng r = stream.split(static_cast<std::uint64_t>(i));
    c.particles[i] = model.propagate(c.particles[i], r);
  };
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

}  // namespace

double clamp_existence(double r, double floor) { return std::clamp(r, floor, 1.0 - floor); }

LmbBelief predict(const LmbBelief& belief, const JmsModel& model,
                  const std::vector<BernoulliComponent>& births, Rng& rng, Exec exec) {
  LmbBelief out = predict_motion(belief, model, rng, exec);
  for (auto& [label, c] : out.components) c.existence *= model.survival();
  for (const auto& b : births) {
    if (out.components.contains(b.label))
      throw InvalidArgument("predict: birth label " + std::to_string(b.label) + " is already live");
    out.components.emplace(b.label, b);
  }
  return out;
}

LmbBelief predict_motion(const LmbBelief& belief, const JmsModel& model, Rng& rng, Exec exec) {
  LmbBelief out = belief;
  const Rng root = rng.split(rng());
  for (auto& [label, c] : out.components) propagate_component(c, model, root, exec);
  return out;
}

double reweight(std::span<const double> weights, std::span<const double> log_g,
                std::span<double> out) {
  const std::size_t n = weights.size();
  if (log_g.size() != n || out.size() != n) throw InvalidArgument("reweight: size mismatch");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double peak = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(log_g[i])) throw NumericalError("reweight: NaN log-likelihood");
    if (weights[i] > 0.0) peak = std::max(peak, std::log(weights[i]) + log_g[i]);
  }
  if (!std::isfinite(peak)) return kNegInf;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = weights[i] > 0.0 ? std::exp(std::log(weights[i]) + log_g[i] - peak) : 0.0;
    out[i] = v;
    total += v;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= total;
  return peak + std::log(total);
}

double updated_existence(double r, double log_mean_likelihood, double floor) {
  if (log_mean_likelihood == -std::numeric_limits<double>::infinity()) return floor;
  // Log-odds form of r L / (1 - r + r L).
  const double rc = clamp_existence(r, floor);
  const double logit = std::log(rc) - std::log1p(-rc) + log_mean_likelihood;
  return clamp_existence(1.0 / (1.0 + std::exp(-logit)), floor);
}

ComponentUpdate update_component(BernoulliComponent& c, std::span<const double> log_g,
                                 double existence_floor) {
  if (log_g.size() != c.particles.size() || c.weights.size() != c.particles.size())
    throw InvalidArgument("update_component: size mismatch");
  ComponentUpdate rep;
  rep.label = c.label;
  std::vector<double> posterior(c.weights.size());
  rep.log_mean_likelihood = reweight(c.weights, log_g, posterior);
  if (!std::isfinite(rep.log_mean_likelihood)) {
    // Numerical collapse: keep the prior weights and existence.
    rep.collapsed = true;
    return rep;
  }
  c.weights = std::move(posterior);
  c.existence = updated_existence(c.existence, rep.log_mean_likelihood, existence_floor);
  return rep;
}

std::vector<ComponentUpdate> update(LmbBelief& belief, const Spectrogram& z, const UavState& uav,
                                    const MeasurementModel& model, double existence_floor,
                                    Exec exec) {
  std::vector<ComponentUpdate> out;
  std::vector<double> log_g;
  for (auto& [label, c] : belief.components) {
    log_g.resize(c.particles.size());
    model.log_likelihoods(label, c.particles, z, uav, log_g, exec);
    out.push_back(update_component(c, log_g, existence_floor));
  }
  return out;
}

void resample(BernoulliComponent& c, Rng& rng) {
  const std::size_t n = c.particles.size();
  if (n == 0) return;
  double total = 0.0;
  for (double w : c.weights) total += w;
  if (!(total > 0.0)) throw NumericalError("resample: all weights are zero");
  std::vector<Particle> picked;
  picked.reserve(n);
  const double step = total / static_cast<double>(n);
  double u = rng.uniform() * step;
  double cumulative = c.weights[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (u > cumulative && j + 1 < n) cumulative += c.weights[++j];
    picked.push_back(c.particles[j]);
    u += step;
  }
  c.particles = std::move(picked);
  c.weights.assign(n, 1.0 / static_cast<double>(n));
}

Eigen::Matrix4d weighted_covariance(const BernoulliComponent& c) {
  Kinematics mean = Kinematics::Zero();
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    mean += c.weights[i] * c.particles[i].x;
    total += c.weights[i];
  }
  if (!(total > 0.0)) return Eigen::Matrix4d::Zero();
  mean /= total;
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Kinematics d = c.particles[i].x - mean;
    cov += c.weights[i] * d * d.transpose();
  }
  return cov / total;
}

void roughen(BernoulliComponent& c, const Eigen::Matrix4d& cov, double scale, Rng& rng) {
  if (!(scale > 0.0) || c.size() < 2) return;
  constexpr double dim = 4.0;
  const double h = std::pow(4.0 / (static_cast<double>(c.size()) * (dim + 2.0)), 1.0 / (dim + 4.0));
  const Eigen::Matrix4d root = (scale * h) * covariance_sqrt(cov);
  for (auto& p : c.particles) {
    Kinematics e;
    for (int i = 0; i < 4; ++i) e[i] = rng.normal();
    p.x += root * e;
  }
}

void resample_degenerate(LmbBelief& belief, double fraction, Rng& rng, double roughening) {
  for (auto& [label, c] : belief.components) {
    if (c.effective_sample_size() >= fraction * static_cast<double>(c.size())) continue;
    const Eigen::Matrix4d cov = roughening > 0.0 ? weighted_covariance(c) : Eigen::Matrix4d::Zero();
    resample(c, rng);
    roughen(c, cov, roughening, rng);
  }
}

std::vector<double> cardinality_pmf(const LmbBelief& belief) {
  std::vector<double> pmf{1.0};
  for (const auto& [label, c] : belief.components) {
    const double r = std::clamp(c.existence, 0.0, 1.0);
    std::vector<double> next(pmf.size() + 1, 0.0);
    for (std::size_t n = 0; n < pmf.size(); ++n) {
      next[n] += pmf[n] * (1.0 - r);
      next[n + 1] += pmf[n] * r;
    }
    pmf = std::move(next);
  }
  return pmf;
}

Mode TrackEstimate::mode() const {
  return mode_prob[0] >= mode_prob[1] ? Mode::Wandering : Mode::ConstantVelocity;
}

TrackEstimate summarize(const BernoulliComponent& c, double period) {
  TrackEstimate e;
  e.label = c.label;
  e.existence = c.existence;
  double total = 0.0, s = 0.0, co = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double w = c.weights[i];
    total += w;
    e.mean += w * c.particles[i].x;
    e.mode_prob[mode_index(c.particles[i].mode)] += w;
    const double angle = 2.0 * kPi * c.particles[i].tau / period;
    s += w * std::sin(angle);
    co += w * std::cos(angle);
  }
  if (!(total > 0.0)) return e;
  e.mean /= total;
  for (double& p : e.mode_prob) p /= total;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Kinematics d = c.particles[i].x - e.mean;
    e.variance += (c.weights[i] / total) * d.cwiseProduct(d);
  }
  e.tau = wrap_offset(std::atan2(s, co) * period / (2.0 * kPi), period);
  return e;
}

std::vector<TrackEstimate> extract_estimate(const LmbBelief& belief, double threshold,
                                            double period) {
  std::vector<TrackEstimate> out;
  for (const auto& [label, c] : belief.components)
    if (c.existence > threshold) out.push_back(summarize(c, period));
  return out;
}

LmbFilter::LmbFilter(FilterParams params, JmsModel dynamics, std::vector<BirthSpec> births,
                     const MeasurementModel& measurement)
    : params_(params), dynamics_(std::move(dynamics)), births_(std::move(births)),
      measurement_(&measurement) {
  if (params_.particles < 1) throw InvalidArgument("filter: need at least one particle");
}

std::vector<ComponentUpdate> LmbFilter::step(const Spectrogram& z, const UavState& uav, Rng& rng) {
  std::erase_if(belief_.components,
                [&](const auto& kv) { return kv.second.existence < params_.prune_threshold; });
  std::set<Label> live;
  for (const auto& [label, c] : belief_.components) live.insert(label);
  std::vector<BirthSpec> due;
  for (const auto& b : births_)
    if (!live.contains(b.label)) due.push_back(b);
  Rng birth_rng = rng.split(rng());
  const auto born = spawn_births(due, live, params_.particles, dynamics_.period(), birth_rng);
  belief_ = predict(belief_, dynamics_, born, rng);
  auto report = update(belief_, z, uav, *measurement_, params_.existence_floor);
  resample_degenerate(belief_, params_.resample_fraction, rng, params_.roughening);
  return report;
}

std::vector<TrackEstimate> LmbFilter::estimates() const {
  return extract_estimate(belief_, params_.extract_threshold, dynamics_.period());
}

}  // namespace rftbd
