// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/planner.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace rftbd;

namespace {

LmbBelief cloud_belief(Label label, double r, const Eigen::Vector2d& center, double spread,
                       double tau, int n, Rng& rng) {
  BernoulliComponent c;
  c.label = label;
  c.existence = r;
  for (int i = 0; i < n; ++i) {
    Particle p;
    p.x << center.x() + spread * rng.normal(), 0.0, center.y() + spread * rng.normal(), 0.0;
    p.mode = Mode::Wandering;
    p.tau = tau + 0.001 * rng.uniform();
    c.particles.push_back(p);
  }
  c.weights.assign(c.size(), 1.0 / n);
  LmbBelief b;
  b.components.emplace(label, std::move(c));
  return b;
}

SensorSetup loud_setup() {
  SensorSetup s;
  s.rx.path_loss_law = PathLossLaw::Power;
  s.rx.noise_cov = 0.015 * 0.015;
  s.tx = {{1, TransmitterParams{}}};
  s.tx[1].offset = 0.4;
  return s;
}

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("action enumeration") {
    PlannerConfig cfg;
    UavKinematics kin;
    Region region;
    UavState u;
    u.position = {300, 300, 30};
    const auto all = enumerate_actions(u, cfg, kin, region, 1.0);
    CHECK(all.size() == 125u);
    const double bound = kin.max_turn_rate * cfg.plan_interval;
    for (const auto& a : all) {
      REQUIRE(a.heading_deltas.size() == 3u);
      REQUIRE(a.waypoints.size() == 3u);
      UavState prev = u;
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(a.heading_deltas[j]) <= bound + 1e-12);
        CHECK(std::abs(normalize_angle(a.waypoints[j].heading - prev.heading)) <= bound + 1e-9);
        CHECK(region.contains(a.waypoints[j].position.head<2>()));
        prev = a.waypoints[j];
      }
    }
    cfg.heading_grid = 1;
    const auto one = enumerate_actions(u, cfg, kin, region, 1.0);
    REQUIRE(one.size() == 1u);
    CHECK(one[0].waypoints.back().position.x() == doctest::Approx(600.0));
    CHECK(one[0].waypoints.back().position.y() == doctest::Approx(300.0));
    CHECK(one[0].clipped_moves == 0);

    u.position = {1450, 300, 30};
    const auto wall = enumerate_actions(u, cfg, kin, region, 1.0);
    CHECK(wall[0].waypoints.back().position.x() == 1500.0);
    CHECK(wall[0].clipped_moves > 0);
    cfg.plan_interval = 2.5;
    CHECK_THROWS_AS(enumerate_actions(u, cfg, kin, region, 2.0), InvalidArgument);
  }

  TEST_CASE("Renyi divergence hand example and identities") {
    const std::vector<double> w1{0.5, 0.5}, w2{0.9, 0.1};
    const WeightedLabel a[] = {{1.0, w2}};
    const WeightedLabel b[] = {{1.0, w1}};
    CHECK(renyi_divergence(a, b, 2.0) == doctest::Approx(std::log(1.64)).epsilon(1e-12));
    CHECK(std::abs(renyi_divergence(a, b, 2.0) - std::log(1.64)) < 1e-12);
    CHECK(renyi_divergence(a, a, 2.0) == 0.0);
    CHECK(renyi_divergence(a, a, 0.5) == 0.0);
    CHECK(renyi_divergence(a, b, 0.5) == doctest::Approx(renyi_divergence(b, a, 0.5)).epsilon(1e-14));
    const double kl = 0.9 * std::log(0.9 / 0.5) + 0.1 * std::log(0.1 / 0.5);
    CHECK(renyi_divergence(a, b, 1.0) == doctest::Approx(kl).epsilon(1e-12));
    CHECK(renyi_divergence(a, b, 1.0 + 1e-6) == doctest::Approx(kl).epsilon(1e-5));
    CHECK_THROWS_AS(renyi_divergence(a, std::span<const WeightedLabel>{}, 2.0), InvalidArgument);
  }

  TEST_CASE("factorized Renyi divergence equals the subset enumeration") {
    Rng rng(17);
    for (double alpha : {0.5, 2.0, 0.3}) {
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> store;
        std::vector<WeightedLabel> p2, p1;
        const int labels = 1 + trial % 5;
        for (int l = 0; l < labels; ++l) {
          store.push_back(test::random_simplex(6, rng));
          store.push_back(test::random_simplex(6, rng));
        }
        for (int l = 0; l < labels; ++l) {
          p2.push_back({rng.uniform(), store[2 * l]});
          p1.push_back({rng.uniform(), store[2 * l + 1]});
        }
        const double got = renyi_divergence(p2, p1, alpha);
        CHECK(got == doctest::Approx(test::renyi_by_subsets(p2, p1, alpha)).epsilon(1e-12).scale(1.0));
        CHECK(got >= -1e-12);
        CHECK(cauchy_schwarz_divergence(p2, p1, 1.0) >= -1e-12);
      }
    }
  }

  TEST_CASE("Cauchy-Schwarz divergence") {
    Rng rng(3);
    const auto w1 = test::random_simplex(8, rng), w2 = test::random_simplex(8, rng);
    const WeightedLabel a[] = {{0.7, w1}, {0.2, w2}};
    const WeightedLabel b[] = {{0.4, w2}, {0.9, w1}};
    CHECK(cauchy_schwarz_divergence(a, a, 1.0) == 0.0);
    CHECK(cauchy_schwarz_divergence(a, b, 1.0) == cauchy_schwarz_divergence(b, a, 1.0));
    CHECK(cauchy_schwarz_divergence(a, b, 1.0) > 0.0);

    const std::vector<double> left{1.0, 0.0}, right{0.0, 1.0};
    const WeightedLabel l[] = {{1.0, left}};
    const WeightedLabel r[] = {{1.0, right}};
    CHECK_THROWS_AS(cauchy_schwarz_divergence(l, r, 1.0), NumericalError);
  }

  TEST_CASE("divergences on beliefs require shared particles") {
    Rng rng(4);
    const LmbBelief b = cloud_belief(1, 0.6, {0, 0}, 10, 0.1, 20, rng);
    CHECK(renyi_divergence(b, b, 0.5) == 0.0);
    CHECK(cauchy_schwarz_divergence(b, b, 1.0) == 0.0);
    const LmbBelief other = cloud_belief(1, 0.6, {0, 0}, 10, 0.1, 20, rng);
    CHECK_THROWS_AS(renyi_divergence(b, other, 0.5), InvalidArgument);
    const LmbBelief relabeled = cloud_belief(2, 0.6, {0, 0}, 10, 0.1, 20, rng);
    CHECK_THROWS_AS(cauchy_schwarz_divergence(b, relabeled, 1.0), InvalidArgument);
  }

  TEST_CASE("void probability") {
    BernoulliComponent c;
    c.label = 1;
    c.existence = 0.8;
    for (int i = 0; i < 10; ++i) {
      Particle p;
      p.x << (i < 4 ? 10.0 : 500.0), 0, 0, 0;
      c.particles.push_back(p);
    }
    c.weights.assign(10, 0.1);
    LmbBelief b;
    b.components.emplace(1, c);
    CHECK(void_probability(b, {0, 0}, 50) == doctest::Approx(0.68).epsilon(1e-14));
    b.components.at(1).existence = 1.0;
    CHECK(void_probability(b, {0, 0}, 1000) < 1e-15);
    b.components.at(1).existence = 0.0;
    CHECK(void_probability(b, {0, 0}, 1000) == 1.0);
    CHECK(void_probability(LmbBelief{}, {0, 0}, 10) == 1.0);
    CHECK_THROWS_AS(void_probability(b, {0, 0}, 0.0), InvalidArgument);

    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      LmbBelief rb = cloud_belief(1, rng.uniform(), {rng.uniform() * 200, 0}, 80, 0.1, 200, rng);
      rb.components.merge(cloud_belief(2, rng.uniform(), {0, rng.uniform() * 200}, 80, 0.5, 200, rng).components);
      double prev = 1.0;
      for (double radius = 5.0; radius < 500.0; radius += 15.0) {
        const double v = void_probability(rb, {0, 0}, radius);
        CHECK(v <= prev);
        prev = v;
      }
    }
  }

  TEST_CASE("action selection") {
    PlannerConfig cfg;
    UavKinematics kin;
    Region region;
    UavState u;
    u.position = {700, 700, 30};
    const auto actions = enumerate_actions(u, cfg, kin, region, 1.0);
    std::vector<ActionScore> flat(actions.size());
    const std::size_t straight = select_action(actions, flat, 0.9);
    CHECK(actions[straight].total_turn() == 0.0);

    std::vector<ActionScore> scores(actions.size());
    Rng rng(2);
    for (auto& s : scores) {
      s.reward = rng.uniform();
      s.min_void = rng.uniform() < 0.5 ? 0.95 : 0.5;
    }
    bool fb = true;
    const std::size_t best = select_action(actions, scores, 0.9, &fb);
    CHECK_FALSE(fb);
    CHECK(scores[best].feasible(0.9));
    for (const auto& s : scores)
      if (s.feasible(0.9)) CHECK(s.reward <= scores[best].reward);
    auto scaled = scores;
    for (auto& s : scaled) s.reward *= 37.5;
    CHECK(select_action(actions, scaled, 0.9) == best);

    for (auto& s : scores) s.min_void = 0.2;
    scores[17].min_void = 0.6;
    CHECK(select_action(actions, scores, 0.9, &fb) == 17u);
    CHECK(fb);

    const std::span<const ActionSequence> first(actions.data(), 1);
    std::vector<ActionScore> single(1);
    single[0].reward = -5.0;
    CHECK(select_action(first, single, 0.9) == 0u);
  }

  TEST_CASE("rollout over an empty belief gives zero reward") {
    const SensorSetup s = loud_setup();
    const MeasurementModel model(s);
    const JmsModel dyn{JmsParams{}};
    PlannerConfig cfg;
    Rng rng(5);
    LmbBelief b = cloud_belief(1, 0.0, {600, 600}, 20, 0.4, 50, rng);
    const auto chain = prediction_chain(b, dyn, cfg, rng);
    REQUIRE(chain.size() == 3u);
    UavState u;
    u.position = {300, 300, 30};
    const auto actions = enumerate_actions(u, cfg, UavKinematics{}, Region{}, 1.0);
    const std::vector<std::vector<ObjectState>> none(3);
    const auto steps = pims_rollout(chain, none, actions[0], model, cfg);
    for (const auto& st : steps) {
      CHECK(st.reward == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
      for (double v : st.ideal.mag) CHECK(v == 0.0);
    }
  }

  TEST_CASE("prediction chain equals repeated motion prediction") {
    const JmsModel dyn{JmsParams{}};
    PlannerConfig cfg;
    Rng seed(6);
    const LmbBelief b = cloud_belief(1, 0.7, {600, 600}, 20, 0.4, 30, seed);
    Rng r1(10), r2(10);
    const auto chain = prediction_chain(b, dyn, cfg, r1);
    LmbBelief manual = b;
    for (int j = 0; j < cfg.horizon; ++j) {
      for (int s = 0; s < 5; ++s) manual = predict_motion(manual, dyn, r2);
      const auto& want = manual.components.at(1);
      const auto& got = chain[j].components.at(1);
      CHECK(got.existence == want.existence);
      for (std::size_t i = 0; i < want.size(); ++i) CHECK(got.particles[i].x == want.particles[i].x);
    }
  }

  TEST_CASE("pseudo-update concentrates weights more when the waypoint is near") {
    const SensorSetup s = loud_setup();
    const MeasurementModel model(s);
    const JmsModel dyn{JmsParams{}};
    PlannerConfig cfg;
    cfg.horizon = 1;
    Rng rng(7);
    const LmbBelief b = cloud_belief(1, 0.95, {700, 700}, 60, 0.4, 400, rng);
    const auto chain = prediction_chain(b, dyn, cfg, rng);
    const PathPlanner planner(cfg, UavKinematics{}, Region{}, dyn, model);
    const auto ideal = planner.ideal_objects(chain, rng);
    REQUIRE(ideal[0].size() == 1u);
    ActionSequence near_seq, far_seq;
    UavState near_pose, far_pose;
    near_pose.position = {650, 700, 30};
    far_pose.position = {50, 50, 30};
    near_seq.waypoints = {near_pose};
    far_seq.waypoints = {far_pose};
    const double ess_near = pims_rollout(chain, ideal, near_seq, model, cfg)[0]
                                .pseudo_posterior.components.at(1).effective_sample_size();
    const double ess_far = pims_rollout(chain, ideal, far_seq, model, cfg)[0]
                               .pseudo_posterior.components.at(1).effective_sample_size();
    CHECK(ess_near < ess_far);
  }

  TEST_CASE("a near-certain object ahead draws the UAV toward it") {
    const SensorSetup s = loud_setup();
    const MeasurementModel model(s);
    const JmsModel dyn{JmsParams{}};
    PlannerConfig cfg;
    Rng rng(9);
    const Eigen::Vector2d target(700, 750);
    const LmbBelief b = cloud_belief(1, 0.99, target, 40, 0.4, 300, rng);
    UavState u;
    u.position = {300, 750, 30};
    const PathPlanner planner(cfg, UavKinematics{}, Region{}, dyn, model);
    Rng plan_rng(1);
    const PlanDecision d = planner.plan(b, u, 0.0, plan_rng, Exec::Serial);
    REQUIRE(d.actions.size() == 125u);
    CHECK_FALSE(d.fallback);
    const auto& chosen = d.actions[d.chosen];
    double prev = (u.position.head<2>() - target).norm();
    for (const auto& w : chosen.waypoints) {
      const double dist = (w.position.head<2>() - target).norm();
      CHECK(dist < prev);
      prev = dist;
    }
    // Exhaustive check: no feasible action scores higher.
    for (std::size_t a = 0; a < d.scores.size(); ++a)
      if (d.scores[a].feasible(cfg.void_threshold)) CHECK(d.scores[a].reward <= d.scores[d.chosen].reward);
    CHECK(d.scores[d.chosen].min_void > cfg.void_threshold);

    // Parallel scoring matches the serial reference.
    Rng r1(1);
    const auto chain = prediction_chain(b, dyn, cfg, r1);
    const auto ideal = planner.ideal_objects(chain, r1);
    const auto serial = planner.score_actions(chain, ideal, d.actions, Exec::Serial);
    const auto parallel = planner.score_actions(chain, ideal, d.actions, Exec::Parallel);
    for (std::size_t a = 0; a < serial.size(); ++a) {
      CHECK(serial[a].reward == parallel[a].reward);
      CHECK(serial[a].min_void == parallel[a].min_void);
    }
  }

  TEST_CASE("straight-path controller flies the diagonal") {
    const Region region;
    UavKinematics kin;
    StraightPathController ctl(kin, region);
    UavState u;
    u.position = {0, 0, 30};
    u.heading = kPi / 4.0;
    for (int k = 0; k < 40; ++k) {
      const double rate = ctl.turn_rate(u, 1.0);
      CHECK(std::abs(rate) < 1e-9);
      u = advance_uav(u, rate, kin.speed, 1.0, region);
      CHECK(u.position.x() == doctest::Approx(u.position.y()));
      CHECK(u.heading == doctest::Approx(kPi / 4.0));
    }
    // At the far corner it turns around, never faster than the limit.
    u.position = {1495, 1495, 30};
    const double rate = ctl.turn_rate(u, 1.0);
    CHECK(std::abs(rate) == doctest::Approx(kin.max_turn_rate));
    CHECK(ctl.target() == Eigen::Vector2d(0, 0));
  }

  TEST_CASE("planner kind names") {
    for (auto k : {PlannerKind::Renyi, PlannerKind::CauchySchwarz, PlannerKind::Straight})
      CHECK(parse_planner_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_planner_kind("greedy"), InvalidArgument);
    PlannerConfig cfg;
    cfg.discount = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  }
}
