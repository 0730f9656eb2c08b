// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/planner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

namespace rftbd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// a^alpha b^(1 - alpha) with 0^alpha = 0 for the first argument and the
// limits 0 / inf for the second.
double power_mix(double a, double b, double alpha) {
  if (a == b) return a;
  if (a <= 0.0) return 0.0;
  if (b <= 0.0) return alpha < 1.0 ? 0.0 : kInf;
  if (alpha == 0.5) return std::sqrt(a * b);
  return std::exp(alpha * std::log(a) + (1.0 - alpha) * std::log(b));
}

// a log(a / b) with 0 log 0 = 0.
double kl_term(double a, double b) {
  if (a <= 0.0) return 0.0;
  if (b <= 0.0) return kInf;
  return a * (std::log(a) - std::log(b));
}

bool same_label(const WeightedLabel& x, const WeightedLabel& y) {
  return x.existence == y.existence && std::equal(x.weights.begin(), x.weights.end(),
                                                  y.weights.begin(), y.weights.end());
}

void check_views(std::span<const WeightedLabel> p, std::span<const WeightedLabel> q) {
  if (p.size() != q.size()) throw InvalidArgument("divergence: label spaces differ");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i].weights.size() != q[i].weights.size())
      throw InvalidArgument("divergence: particle supports differ");
}

bool same_particle(const Particle& a, const Particle& b) {
  return a.x == b.x && a.mode == b.mode && a.tau == b.tau;
}

std::pair<std::vector<WeightedLabel>, std::vector<WeightedLabel>> shared_views(
    const LmbBelief& p2, const LmbBelief& p1) {
  if (p2.size() != p1.size()) throw InvalidArgument("divergence: label spaces differ");
  std::vector<WeightedLabel> v2, v1;
  auto it1 = p1.components.begin();
  for (const auto& [label, c2] : p2.components) {
    const auto& c1 = (it1++)->second;
    if (c1.label != c2.label || label != c1.label)
      throw InvalidArgument("divergence: label spaces differ");
    if (c1.size() != c2.size() ||
        !std::equal(c1.particles.begin(), c1.particles.end(), c2.particles.begin(), same_particle))
      throw InvalidArgument("divergence: particle supports differ");
    v2.push_back({c2.existence, c2.weights});
    v1.push_back({c1.existence, c1.weights});
  }
  return {std::move(v2), std::move(v1)};
}

std::size_t steps_per_plan(const PlannerConfig& cfg, double period) {
  const double n = std::round(cfg.plan_interval / period);
  if (n < 1.0 || std::abs(n * period - cfg.plan_interval) > 1e-9 * cfg.plan_interval)
    throw InvalidArgument("planner: plan interval must be a positive multiple of the period");
  return static_cast<std::size_t>(n);
}

}  // namespace

Eigen::Vector2d Region::clamp(const Eigen::Vector2d& p) const {
  return {std::clamp(p.x(), x_min, x_max), std::clamp(p.y(), y_min, y_max)};
}

bool Region::contains(const Eigen::Vector2d& p, double slack) const {
  return p.x() >= x_min - slack && p.x() <= x_max + slack && p.y() >= y_min - slack &&
         p.y() <= y_max + slack;
}

UavState advance_uav(const UavState& u, double turn_rate, double speed, double dt,
                     const Region& region) {
  UavState out = u;
  out.heading = normalize_angle(u.heading + turn_rate * dt);
  const Eigen::Vector2d p = u.position.head<2>() +
                            speed * dt * Eigen::Vector2d(std::cos(out.heading), std::sin(out.heading));
  out.position.head<2>() = region.clamp(p);
  return out;
}

std::string_view to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::Renyi: return "renyi";
    case PlannerKind::CauchySchwarz: return "cauchy";
    case PlannerKind::Straight: return "straight";
  }
  return "unknown";
}

PlannerKind parse_planner_kind(std::string_view s) {
  if (s == "renyi") return PlannerKind::Renyi;
  if (s == "cauchy" || s == "cauchy_schwarz") return PlannerKind::CauchySchwarz;
  if (s == "straight") return PlannerKind::Straight;
  throw InvalidArgument("unknown planner: " + std::string(s));
}

void PlannerConfig::validate() const {
  if (!(alpha >= 0.0)) throw InvalidArgument("planner: alpha must be >= 0");
  if (!(kernel_volume > 0.0)) throw InvalidArgument("planner: kernel volume must be positive");
  if (horizon < 1) throw InvalidArgument("planner: horizon must be >= 1");
  if (!(plan_interval > 0.0)) throw InvalidArgument("planner: plan interval must be positive");
  if (!(discount > 0.0 && discount <= 1.0)) throw InvalidArgument("planner: discount must lie in (0, 1]");
  if (!(void_threshold >= 0.0 && void_threshold <= 1.0))
    throw InvalidArgument("planner: void threshold must lie in [0, 1]");
  if (!(void_radius > 0.0)) throw InvalidArgument("planner: void radius must be positive");
  if (heading_grid < 1) throw InvalidArgument("planner: heading grid must be >= 1");
}

double ActionSequence::total_turn() const {
  double t = 0.0;
  for (double d : heading_deltas) t += std::abs(d);
  return t;
}

std::vector<ActionSequence> enumerate_actions(const UavState& u, const PlannerConfig& cfg,
                                              const UavKinematics& kin, const Region& region,
                                              double period) {
  cfg.validate();
  const std::size_t sub = steps_per_plan(cfg, period);
  const double max_delta = kin.max_turn_rate * cfg.plan_interval;
  std::vector<double> grid;
  if (cfg.heading_grid == 1) {
    grid.push_back(0.0);
  } else {
    for (int g = 0; g < cfg.heading_grid; ++g)
      grid.push_back(-max_delta + 2.0 * max_delta * g / (cfg.heading_grid - 1));
  }
  std::size_t count = 1;
  for (int j = 0; j < cfg.horizon; ++j) count *= grid.size();

  std::vector<ActionSequence> out(count);
  for (std::size_t a = 0; a < count; ++a) {
    auto& seq = out[a];
    std::size_t code = a;
    std::vector<std::size_t> idx(cfg.horizon);
    for (int j = cfg.horizon - 1; j >= 0; --j) {
      idx[j] = code % grid.size();
      code /= grid.size();
    }
    UavState pose = u;
    for (int j = 0; j < cfg.horizon; ++j) {
      const double delta = grid[idx[j]];
      const double rate = delta / cfg.plan_interval;
      for (std::size_t s = 0; s < sub; ++s) {
        const UavState next = advance_uav(pose, rate, kin.speed, period, region);
        if ((next.position - pose.position).head<2>().norm() < kin.speed * period - 1e-9)
          ++seq.clipped_moves;
        pose = next;
      }
      seq.heading_deltas.push_back(delta);
      seq.waypoints.push_back(pose);
    }
  }
  return out;
}

double renyi_divergence(std::span<const WeightedLabel> p2, std::span<const WeightedLabel> p1,
                        double alpha) {
  check_views(p2, p1);
  if (!(alpha >= 0.0)) throw InvalidArgument("renyi_divergence: alpha must be >= 0");
  if (std::abs(alpha - 1.0) < 1e-12) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p2.size(); ++i) {
      if (same_label(p2[i], p1[i])) continue;
      const double r2 = p2[i].existence, r1 = p1[i].existence;
      double inner = 0.0;
      for (std::size_t n = 0; n < p2[i].weights.size(); ++n)
        inner += kl_term(p2[i].weights[n], p1[i].weights[n]);
      kl += kl_term(1.0 - r2, 1.0 - r1) + kl_term(r2, r1) + (r2 > 0.0 ? r2 * inner : 0.0);
    }
    return kl;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p2.size(); ++i) {
    if (same_label(p2[i], p1[i])) continue;
    const double r2 = p2[i].existence, r1 = p1[i].existence;
    double overlap = 0.0;
    const auto& w2 = p2[i].weights;
    const auto& w1 = p1[i].weights;
    if (alpha == 0.5) {
      for (std::size_t n = 0; n < w2.size(); ++n) overlap += std::sqrt(w2[n] * w1[n]);
    } else {
      for (std::size_t n = 0; n < w2.size(); ++n) overlap += power_mix(w2[n], w1[n], alpha);
    }
    const double empty = power_mix(1.0 - r2, 1.0 - r1, alpha);
    const double present = power_mix(r2, r1, alpha);
    total += std::log(empty + (present > 0.0 ? present * overlap : 0.0));
  }
  return total / (alpha - 1.0);
}

double renyi_divergence(const LmbBelief& p2, const LmbBelief& p1, double alpha) {
  const auto [v2, v1] = shared_views(p2, p1);
  return renyi_divergence(v2, v1, alpha);
}

double log_cs_inner_product(std::span<const WeightedLabel> pi, std::span<const WeightedLabel> pj,
                            double kernel_volume) {
  check_views(pi, pj);
  double total = 0.0;
  for (std::size_t l = 0; l < pi.size(); ++l) {
    const double ri = pi[l].existence, rj = pj[l].existence;
    double overlap = 0.0;
    for (std::size_t n = 0; n < pi[l].weights.size(); ++n)
      overlap += pi[l].weights[n] * pj[l].weights[n];
    total += std::log((1.0 - ri) * (1.0 - rj) + ri * rj * kernel_volume * overlap);
  }
  return total;
}

double cauchy_schwarz_divergence(std::span<const WeightedLabel> p2,
                                 std::span<const WeightedLabel> p1, double kernel_volume) {
  if (!(kernel_volume > 0.0)) throw InvalidArgument("cauchy_schwarz: kernel volume must be positive");
  const double cross = log_cs_inner_product(p2, p1, kernel_volume);
  const double self2 = log_cs_inner_product(p2, p2, kernel_volume);
  const double self1 = log_cs_inner_product(p1, p1, kernel_volume);
  if (!std::isfinite(cross) || !std::isfinite(self2) || !std::isfinite(self1))
    throw NumericalError("cauchy_schwarz: zero inner product (disjoint supports)");
  return -(cross - 0.5 * (self1 + self2));
}

double cauchy_schwarz_divergence(const LmbBelief& p2, const LmbBelief& p1, double kernel_volume) {
  const auto [v2, v1] = shared_views(p2, p1);
  return cauchy_schwarz_divergence(v2, v1, kernel_volume);
}

double void_probability(const LmbBelief& belief, const Eigen::Vector2d& center, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("void_probability: radius must be positive");
  const double r2 = radius * radius;
  double prob = 1.0;
  for (const auto& [label, c] : belief.components) {
    double inside = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double dx = c.particles[i].x[0] - center.x();
      const double dy = c.particles[i].x[2] - center.y();
      if (dx * dx + dy * dy <= r2) inside += c.weights[i];
    }
    prob *= 1.0 - std::clamp(c.existence, 0.0, 1.0) * std::min(inside, 1.0);
  }
  return prob;
}

LmbBelief predict_chain_step(const LmbBelief& belief, const JmsModel& model, int steps, Rng& rng) {
  LmbBelief b = belief;
  for (int s = 0; s < steps; ++s) b = predict_motion(b, model, rng);
  return b;
}

std::vector<LmbBelief> prediction_chain(const LmbBelief& belief, const JmsModel& model,
                                        const PlannerConfig& cfg, Rng& rng) {
  const auto sub = static_cast<int>(steps_per_plan(cfg, model.period()));
  std::vector<LmbBelief> chain;
  chain.reserve(cfg.horizon);
  const LmbBelief* prev = &belief;
  for (int j = 0; j < cfg.horizon; ++j) {
    chain.push_back(predict_chain_step(*prev, model, sub, rng));
    prev = &chain.back();
  }
  return chain;
}

namespace {

// Divergence between the pseudo-posterior and the predicted belief at one
// waypoint. Labels below min_existence are skipped in both.
double step_reward(const LmbBelief& predicted, const Spectrogram& ideal, const UavState& pose,
                   const MeasurementModel& model, const PlannerConfig& cfg,
                   LmbBelief* pseudo_out) {
  std::vector<std::vector<double>> posterior;
  std::vector<WeightedLabel> v2, v1;
  std::vector<double> log_g;
  posterior.reserve(predicted.size());
  for (const auto& [label, c] : predicted.components) {
    if (c.existence < cfg.min_existence) continue;
    log_g.resize(c.size());
    model.log_likelihoods(label, c.particles, ideal, pose, log_g, Exec::Serial);
    auto& w = posterior.emplace_back(c.size());
    const double log_pg = reweight(c.weights, log_g, w);
    double r = c.existence;
    if (std::isfinite(log_pg)) {
      r = updated_existence(c.existence, log_pg);
    } else {
      w = c.weights;
    }
    v2.push_back({r, w});
    v1.push_back({c.existence, c.weights});
    if (pseudo_out != nullptr) {
      auto& pc = pseudo_out->components.at(label);
      pc.existence = r;
      pc.weights = w;
    }
  }
  if (cfg.divergence == DivergenceKind::Renyi) return renyi_divergence(v2, v1, cfg.alpha);
  return cauchy_schwarz_divergence(v2, v1, cfg.kernel_volume);
}

ActionScore score_action(const std::vector<LmbBelief>& chain,
                         const std::vector<std::vector<ObjectState>>& ideal_objects,
                         const ActionSequence& action, const MeasurementModel& model,
                         const PlannerConfig& cfg) {
  ActionScore s;
  double weight = 1.0;
  for (std::size_t j = 0; j < chain.size(); ++j) {
    const UavState& pose = action.waypoints[j];
    const double v = void_probability(chain[j], pose.position.head<2>(), cfg.void_radius);
    const Spectrogram z = model.ideal_measurement(ideal_objects[j], pose);
    const double d = step_reward(chain[j], z, pose, model, cfg, nullptr);
    s.step_voids.push_back(v);
    s.step_rewards.push_back(d);
    s.reward += weight * d;
    s.min_void = std::min(s.min_void, v);
    weight *= cfg.discount;
  }
  return s;
}

}  // namespace

std::vector<PimsStep> pims_rollout(const std::vector<LmbBelief>& chain,
                                   const std::vector<std::vector<ObjectState>>& ideal_objects,
                                   const ActionSequence& action, const MeasurementModel& model,
                                   const PlannerConfig& cfg) {
  if (chain.size() != ideal_objects.size() || chain.size() > action.waypoints.size())
    throw InvalidArgument("pims_rollout: horizon mismatch");
  std::vector<PimsStep> out;
  for (std::size_t j = 0; j < chain.size(); ++j) {
    PimsStep st;
    const UavState& pose = action.waypoints[j];
    st.predicted = chain[j];
    st.pseudo_posterior = chain[j];
    st.ideal = model.ideal_measurement(ideal_objects[j], pose);
    st.reward = step_reward(chain[j], st.ideal, pose, model, cfg, &st.pseudo_posterior);
    st.void_prob = void_probability(chain[j], pose.position.head<2>(), cfg.void_radius);
    out.push_back(std::move(st));
  }
  return out;
}

std::size_t select_action(std::span<const ActionSequence> actions,
                          std::span<const ActionScore> scores, double void_threshold,
                          bool* fallback) {
  if (actions.empty() || actions.size() != scores.size())
    throw InvalidArgument("select_action: need one score per action");
  double top = 0.0;
  bool any_feasible = false;
  for (const auto& s : scores)
    if (s.feasible(void_threshold)) {
      top = std::max(top, std::abs(s.reward));
      any_feasible = true;
    }
  if (fallback != nullptr) *fallback = !any_feasible;
  if (!any_feasible) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < scores.size(); ++a)
      if (scores[a].min_void > scores[best].min_void) best = a;
    return best;
  }
  // Rewards closer than this are ties.
  const double tol = std::max(1e-9 * top, 1e-12);
  std::size_t best = scores.size();
  for (std::size_t a = 0; a < scores.size(); ++a) {
    if (!scores[a].feasible(void_threshold)) continue;
    if (best == scores.size()) {
      best = a;
      continue;
    }
    const double diff = scores[a].reward - scores[best].reward;
    if (diff > tol) {
      best = a;
      continue;
    }
    if (std::abs(diff) > tol) continue;
    // Ties: prefer paths the boundary does not cut short, then the gentlest turn.
    if (actions[a].clipped_moves != actions[best].clipped_moves) {
      if (actions[a].clipped_moves < actions[best].clipped_moves) best = a;
    } else if (actions[a].total_turn() < actions[best].total_turn() - 1e-12) {
      best = a;
    }
  }
  return best;
}

PathPlanner::PathPlanner(PlannerConfig cfg, UavKinematics kin, Region region,
                         const JmsModel& dynamics, const MeasurementModel& measurement)
    : cfg_(cfg), kin_(kin), region_(region), dynamics_(&dynamics), measurement_(&measurement) {
  cfg_.validate();
  steps_per_plan(cfg_, dynamics.period());
}

std::vector<std::vector<ObjectState>> PathPlanner::ideal_objects(
    const std::vector<LmbBelief>& chain, Rng& rng) const {
  std::vector<std::vector<ObjectState>> out;
  for (const auto& b : chain) {
    auto& objs = out.emplace_back();
    if (cfg_.pims == PimsEstimate::Extracted) {
      for (const auto& e : extract_estimate(b, cfg_.extract_threshold, dynamics_->period()))
        objs.push_back({e.mean, e.mode(), e.tau, e.label});
      continue;
    }
    for (const auto& [label, c] : b.components) {
      if (rng.uniform() >= c.existence || c.size() == 0) continue;
      double u = rng.uniform();
      std::size_t i = 0;
      while (i + 1 < c.size() && u >= c.weights[i]) u -= c.weights[i++];
      objs.push_back(ObjectState::from(c.particles[i], label));
    }
  }
  return out;
}

std::vector<ActionScore> PathPlanner::score_actions(
    const std::vector<LmbBelief>& chain, const std::vector<std::vector<ObjectState>>& ideal,
    std::span<const ActionSequence> actions, Exec exec) const {
  std::vector<ActionScore> scores(actions.size());
  const auto n = static_cast<std::ptrdiff_t>(actions.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t a = 0; a < n; ++a)
      scores[a] = score_action(chain, ideal, actions[a], *measurement_, cfg_);
    return scores;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t a = 0; a < n; ++a) {
    try {
      scores[a] = score_action(chain, ideal, actions[a], *measurement_, cfg_);
    } catch (...) {
#pragma omp critical(rftbd_planner_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return scores;
}

PlanDecision PathPlanner::plan(const LmbBelief& belief, const UavState& uav, double time, Rng& rng,
                               Exec exec) const {
  PlanDecision d;
  d.time = time;
  const auto chain = prediction_chain(belief, *dynamics_, cfg_, rng);
  const auto ideal = ideal_objects(chain, rng);
  d.actions = enumerate_actions(uav, cfg_, kin_, region_, dynamics_->period());
  d.scores = score_actions(chain, ideal, d.actions, exec);
  d.chosen = select_action(d.actions, d.scores, cfg_.void_threshold, &d.fallback);
  return d;
}

StraightPathController::StraightPathController(UavKinematics kin, Region region)
    : kin_(kin), region_(region), target_(region.x_max, region.y_max) {}

double StraightPathController::turn_rate(const UavState& u, double dt) {
  const Eigen::Vector2d pos = u.position.head<2>();
  if ((target_ - pos).norm() <= kin_.speed * dt) {
    const bool at_far = target_.x() == region_.x_max;
    target_ = at_far ? Eigen::Vector2d(region_.x_min, region_.y_min)
                     : Eigen::Vector2d(region_.x_max, region_.y_max);
  }
  const Eigen::Vector2d to = target_ - pos;
  const double desired = std::atan2(to.y(), to.x());
  const double error = normalize_angle(desired - u.heading);
  return std::clamp(error / dt, -kin_.max_turn_rate, kin_.max_turn_rate);
}

}  // namespace rftbd
