// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Serial reference versus OpenMP kernels.

#include "rftbd/likelihood.hpp"
#include "rftbd/planner.hpp"
#include "rftbd/rf_signal.hpp"
#include "rftbd/tbd_lmb.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace rftbd;

namespace {

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::Serial : Exec::Parallel;
}

SensorSetup bench_setup() {
  SensorSetup s;
  s.rx.path_loss_law = PathLossLaw::Power;
  s.tx = {{1, TransmitterParams{}}};
  s.tx[1].offset = 0.3;
  return s;
}

LmbBelief cloud(int n, double r, Rng& rng) {
  BernoulliComponent c;
  c.label = 1;
  c.existence = r;
  for (int i = 0; i < n; ++i) {
    Particle p;
    p.x << 700 + 50 * rng.normal(), rng.normal(), 700 + 50 * rng.normal(), rng.normal();
    p.mode = i % 2 ? Mode::Wandering : Mode::ConstantVelocity;
    p.tau = 0.3 + 0.002 * rng.normal();
    c.particles.push_back(p);
  }
  c.weights.assign(c.size(), 1.0 / n);
  LmbBelief b;
  b.components.emplace(1, std::move(c));
  return b;
}

void BM_Stft(benchmark::State& state) {
  const SensorSetup s = bench_setup();
  Rng rng(1);
  const auto samples = synth_baseband({}, UavState{}, 0.0, s, rng);
  for (auto _ : state) benchmark::DoNotOptimize(stft(samples, s.rx, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * s.rx.frame_count());
}

void BM_ParticleLikelihoods(benchmark::State& state) {
  const SensorSetup s = bench_setup();
  const MeasurementModel model(s);
  Rng rng(2);
  const LmbBelief b = cloud(static_cast<int>(state.range(1)), 0.5, rng);
  const auto& ps = b.components.at(1).particles;
  UavState u;
  u.position = {500, 500, 30};
  ObjectState truth{{700, 0, 700, 0}, Mode::Wandering, 0.3, 1};
  const Spectrogram z = observe(std::span(&truth, 1), u, 0.0, s, rng);
  std::vector<double> out(ps.size());
  for (auto _ : state) {
    model.log_likelihoods(1, ps, z, u, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ps.size()));
}

void BM_ActionScoring(benchmark::State& state) {
  const SensorSetup s = bench_setup();
  const MeasurementModel model(s);
  const JmsModel dyn{JmsParams{}};
  PlannerConfig cfg;
  Rng rng(3);
  const LmbBelief b = cloud(static_cast<int>(state.range(1)), 0.95, rng);
  const PathPlanner planner(cfg, UavKinematics{}, Region{}, dyn, model);
  const auto chain = prediction_chain(b, dyn, cfg, rng);
  const auto ideal = planner.ideal_objects(chain, rng);
  UavState u;
  u.position = {400, 700, 30};
  const auto actions = enumerate_actions(u, cfg, UavKinematics{}, Region{}, dyn.period());
  for (auto _ : state) benchmark::DoNotOptimize(planner.score_actions(chain, ideal, actions, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(actions.size()));
}

}  // namespace

BENCHMARK(BM_Stft)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ParticleLikelihoods)
    ->ArgNames({"parallel", "particles"})
    ->Args({0, 2000})
    ->Args({1, 2000})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ActionScoring)
    ->ArgNames({"parallel", "particles"})
    ->Args({0, 500})
    ->Args({1, 500})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
