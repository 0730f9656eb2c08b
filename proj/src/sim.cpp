// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rftbd {

namespace {

// Shortest round-trip representation keeps CSV output bit-exact.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

void reflect(ObjectState& s, const Region& region) {
  auto fold = [](double& p, double& v, double lo, double hi) {
    for (int guard = 0; guard < 8 && (p < lo || p > hi); ++guard) {
      if (p < lo) p = 2.0 * lo - p;
      if (p > hi) p = 2.0 * hi - p;
      v = -v;
    }
    p = std::clamp(p, lo, hi);
  };
  fold(s.x[0], s.x[1], region.x_min, region.x_max);
  fold(s.x[2], s.x[3], region.y_min, region.y_max);
}

std::vector<Eigen::Vector2d> positions(const std::vector<ObjectState>& xs) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& x : xs) out.emplace_back(x.x[0], x.x[2]);
  return out;
}

std::vector<Eigen::Vector2d> positions(const std::vector<TrackEstimate>& xs) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& x : xs) out.emplace_back(x.mean[0], x.mean[2]);
  return out;
}

nlohmann::json track_json(const TrackEstimate& e) {
  return {{"label", e.label},
          {"existence", e.existence},
          {"mean", {e.mean[0], e.mean[1], e.mean[2], e.mean[3]}},
          {"variance", {e.variance[0], e.variance[1], e.variance[2], e.variance[3]}},
          {"tau", e.tau},
          {"mode_prob",
           {{std::string(to_string(Mode::Wandering)), e.mode_prob[0]},
            {std::string(to_string(Mode::ConstantVelocity)), e.mode_prob[1]}}}};
}

}  // namespace

Mode scheduled_mode(const ObjectSpec& spec, double t) {
  Mode m = spec.initial_mode;
  for (const auto& s : spec.schedule)
    if (t >= s.time - 1e-9) m = s.mode;
  return m;
}

TruthTrajectory simulate_truth(const ScenarioConfig& cfg, Rng& rng) {
  const int steps = cfg.steps();
  const double period = cfg.period();
  JmsParams jp = cfg.dynamics;
  jp.period = period;
  const JmsModel model(jp);
  std::array<Eigen::Matrix4d, kModeCount> root;
  for (int m = 0; m < kModeCount; ++m)
    root[m] = cfg.truth_process_noise ? covariance_sqrt(model.process_cov(static_cast<Mode>(m)))
                                      : Eigen::Matrix4d::Zero();
  TruthTrajectory truth(static_cast<std::size_t>(std::max(steps, 0)));
  const Rng base = rng.split(rng());
  for (const auto& spec : cfg.objects) {
    Rng orng = base.split(static_cast<std::uint64_t>(static_cast<std::int64_t>(spec.label)));
    ObjectState s{spec.initial, scheduled_mode(spec, spec.birth), spec.tx.offset, spec.label};
    double clock = spec.birth;  // time s refers to
    auto advance = [&] {
      const double next = clock + period;
      const Mode dest = cfg.truth_modes == TruthModes::Scripted ? scheduled_mode(spec, next)
                                                                : model.sample_next_mode(s.mode, orng);
      if (cfg.truth_modes == TruthModes::Scripted && dest == Mode::ConstantVelocity &&
          s.mode == Mode::Wandering) {
        // Scripted switches resume the object's configured velocity.
        s.x[1] = spec.initial[1];
        s.x[3] = spec.initial[3];
      }
      Kinematics noise;
      for (int i = 0; i < 4; ++i) noise[i] = orng.normal();
      s.x = model.transition(dest) * s.x + root[mode_index(dest)] * noise;
      s.mode = dest;
      reflect(s, cfg.region);
      clock = next;
    };
    for (int k = 1; k <= steps; ++k) {
      const double t = k * period;
      if (t < spec.birth - 1e-9) continue;
      if (t >= spec.death - 1e-9) break;
      while (clock < t - 1e-9) advance();
      truth[k - 1].push_back(s);
    }
  }
  return truth;
}

RunLog run_closed_loop(const ScenarioConfig& cfg_in, std::uint64_t seed,
                       const RunOptions& options) {
  ScenarioConfig cfg = cfg_in;
  cfg.dynamics.period = cfg.period();
  cfg.validate();
  RunLog log;
  const int steps = cfg.steps();
  if (steps <= 0) return log;

  const Rng root(seed);
  Rng truth_rng = root.split(1);
  Rng meas_rng = root.split(2);
  Rng filter_rng = root.split(3);
  Rng plan_rng = root.split(4);

  const TruthTrajectory truth = simulate_truth(cfg, truth_rng);
  const SensorSetup sensor = cfg.sensor();
  const MeasurementModel measurement(sensor);
  const JmsModel dynamics(cfg.dynamics);
  LmbFilter filter(cfg.filter, dynamics, cfg.births, measurement);

  PlannerConfig pcfg = cfg.planning;
  pcfg.divergence = cfg.planner == PlannerKind::CauchySchwarz ? DivergenceKind::CauchySchwarz
                                                              : DivergenceKind::Renyi;
  const PathPlanner planner(pcfg, cfg.uav, cfg.region, dynamics, measurement);
  StraightPathController straight(cfg.uav, cfg.region);
  const double period = cfg.period();
  const int plan_every = static_cast<int>(std::lround(pcfg.plan_interval / period));

  UavState uav = cfg.uav_start;
  uav.heading = normalize_angle(uav.heading);
  double turn_rate = 0.0;
  for (int k = 1; k <= steps; ++k) {
    const double t = k * period;
    try {
      StepRecord rec;
      rec.step = k;
      rec.time = t;
      rec.uav = uav;
      rec.truth = truth[k - 1];
      const Spectrogram z = observe(rec.truth, uav, t - period, sensor, meas_rng, k);
      filter.step(z, uav, filter_rng);
      rec.estimates = filter.estimates();
      if (options.keep_components)
        for (const auto& [label, c] : filter.belief().components)
          rec.components.push_back(summarize(c, period));
      rec.cardinality = cardinality_pmf(filter.belief());
      rec.ospa = ospa(positions(rec.truth), positions(rec.estimates), cfg.ospa);
      log.steps.push_back(std::move(rec));

      if (cfg.planner == PlannerKind::Straight) {
        turn_rate = straight.turn_rate(uav, period);
      } else if (k % plan_every == 0) {
        PlanDecision d = planner.plan(filter.belief(), uav, t, plan_rng);
        turn_rate = d.actions[d.chosen].heading_deltas.front() / pcfg.plan_interval;
        log.decisions.push_back(std::move(d));
      }
      uav = advance_uav(uav, turn_rate, cfg.uav.speed, period, cfg.region);
    } catch (const std::exception& e) {
      throw std::runtime_error("run aborted at step " + std::to_string(k) + ": " + e.what());
    }
  }
  return log;
}

RunSummary summarize_run(const RunLog& log, double void_threshold) {
  RunSummary s;
  s.steps = static_cast<int>(log.steps.size());
  for (const auto& r : log.steps) {
    s.mean_ospa += r.ospa.total;
    s.mean_loc += r.ospa.localization;
    s.mean_card += r.ospa.cardinality;
  }
  if (s.steps > 0) {
    s.mean_ospa /= s.steps;
    s.mean_loc /= s.steps;
    s.mean_card /= s.steps;
    s.final_ospa = log.steps.back().ospa.total;
  }
  s.epochs = static_cast<int>(log.decisions.size());
  for (const auto& d : log.decisions) {
    if (d.fallback) {
      ++s.fallback_epochs;
      continue;
    }
    if (!d.scores[d.chosen].feasible(void_threshold)) ++s.void_violations;
  }
  return s;
}

std::vector<SweepRow> monte_carlo(const ScenarioConfig& cfg, int n_runs,
                                  const std::vector<double>& noise_grid,
                                  const std::vector<PlannerKind>& variants) {
  if (n_runs < 1) throw InvalidArgument("monte_carlo: need at least one run");
  std::vector<SweepRow> rows;
  RunOptions opts;
  opts.keep_components = false;
  for (PlannerKind variant : variants) {
    for (double noise : noise_grid) {
      ScenarioConfig c = cfg;
      c.planner = variant;
      c.rx.noise_cov = noise;
      SweepRow row;
      row.variant = variant;
      row.noise_cov = noise;
      row.runs = n_runs;
      row.run_ospa.assign(n_runs, 0.0);
      std::vector<double> card(n_runs, 0.0);
      std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
      for (int i = 0; i < n_runs; ++i) {
        try {
          const RunLog log = run_closed_loop(c, cfg.seed + static_cast<std::uint64_t>(i), opts);
          const RunSummary s = summarize_run(log, c.planning.void_threshold);
          row.run_ospa[i] = s.mean_ospa;
          card[i] = s.mean_card;
        } catch (...) {
#pragma omp critical(rftbd_sweep_error)
          if (!error) error = std::current_exception();
        }
      }
      if (error) std::rethrow_exception(error);
      double sum = 0.0, sum_card = 0.0;
      for (int i = 0; i < n_runs; ++i) {
        sum += row.run_ospa[i];
        sum_card += card[i];
      }
      row.mean_ospa = sum / n_runs;
      row.mean_card = sum_card / n_runs;
      if (n_runs > 1) {
        double ss = 0.0;
        for (double v : row.run_ospa) ss += (v - row.mean_ospa) * (v - row.mean_ospa);
        row.stderr_ospa = std::sqrt(ss / (n_runs - 1) / n_runs);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_metrics_csv(const std::filesystem::path& path, const RunLog& log) {
  auto os = open_out(path);
  os << "step,ospa_total,ospa_loc,ospa_card,true_n,est_n\n";
  for (const auto& r : log.steps)
    os << r.step << ',' << num(r.ospa.total) << ',' << num(r.ospa.localization) << ','
       << num(r.ospa.cardinality) << ',' << r.truth.size() << ',' << r.estimates.size() << '\n';
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  auto os = open_out(path);
  os << "variant,noise_cov,runs,mean_ospa,stderr_ospa,mean_card\n";
  for (const auto& r : rows)
    os << to_string(r.variant) << ',' << num(r.noise_cov) << ',' << r.runs << ','
       << num(r.mean_ospa) << ',' << num(r.stderr_ospa) << ',' << num(r.mean_card) << '\n';
}

void write_run_outputs(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                       const RunLog& log, std::uint64_t seed) {
  std::filesystem::create_directories(dir / "belief");
  write_metrics_csv(dir / "metrics.csv", log);

  {
    auto os = open_out(dir / "trajectory.csv");
    os << "step,time,x,y,z,heading\n";
    for (const auto& r : log.steps)
      os << r.step << ',' << num(r.time) << ',' << num(r.uav.position.x()) << ','
         << num(r.uav.position.y()) << ',' << num(r.uav.position.z()) << ','
         << num(r.uav.heading) << '\n';
  }
  {
    auto os = open_out(dir / "truth.csv");
    os << "step,time,label,px,vx,py,vy,mode,tau\n";
    for (const auto& r : log.steps)
      for (const auto& x : r.truth)
        os << r.step << ',' << num(r.time) << ',' << x.label << ',' << num(x.x[0]) << ','
           << num(x.x[1]) << ',' << num(x.x[2]) << ',' << num(x.x[3]) << ',' << to_string(x.mode)
           << ',' << num(x.tau) << '\n';
  }
  {
    auto os = open_out(dir / "decisions.csv");
    const std::size_t n_actions = log.decisions.empty() ? 0 : log.decisions.front().scores.size();
    const int horizon = cfg.planning.horizon;
    os << "time,chosen,fallback";
    for (int j = 0; j < horizon; ++j) os << ",delta_" << j + 1;
    for (std::size_t a = 0; a < n_actions; ++a) os << ",reward_" << a;
    for (std::size_t a = 0; a < n_actions; ++a) os << ",void_" << a;
    os << '\n';
    for (const auto& d : log.decisions) {
      os << num(d.time) << ',' << d.chosen << ',' << (d.fallback ? 1 : 0);
      for (double delta : d.actions[d.chosen].heading_deltas) os << ',' << num(delta);
      for (const auto& s : d.scores) os << ',' << num(s.reward);
      for (const auto& s : d.scores) os << ',' << num(s.min_void);
      os << '\n';
    }
  }
  for (const auto& r : log.steps) {
    nlohmann::json j;
    j["step"] = r.step;
    j["time"] = r.time;
    j["cardinality"] = r.cardinality;
    j["components"] = nlohmann::json::array();
    const auto& comps = r.components.empty() ? r.estimates : r.components;
    for (const auto& e : comps) j["components"].push_back(track_json(e));
    auto os = open_out(dir / "belief" / (std::to_string(r.step) + ".json"));
    os << j.dump(1) << '\n';
  }
  const RunSummary s = summarize_run(log, cfg.planning.void_threshold);
  nlohmann::json sj = {{"name", cfg.name},
                       {"seed", seed},
                       {"planner", std::string(to_string(cfg.planner))},
                       {"noise_cov", cfg.rx.noise_cov},
                       {"steps", s.steps},
                       {"mean_ospa", s.mean_ospa},
                       {"mean_ospa_loc", s.mean_loc},
                       {"mean_ospa_card", s.mean_card},
                       {"final_ospa", s.final_ospa},
                       {"planning_epochs", s.epochs},
                       {"fallback_epochs", s.fallback_epochs},
                       {"void_violations", s.void_violations}};
  auto os = open_out(dir / "summary.json");
  os << sj.dump(2) << '\n';
}

std::vector<double> parse_noise_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  try {
    while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  } catch (const std::logic_error&) {
    throw InvalidArgument("noise grid: cannot parse '" + spec + "'");
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    throw InvalidArgument("noise grid must be a:b:step with a <= b and step > 0");
  std::vector<double> grid;
  const auto n = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (int i = 0; i <= n; ++i) grid.push_back(parts[0] + i * parts[2]);
  return grid;
}

std::vector<PlannerKind> parse_variants(const std::string& spec) {
  std::vector<PlannerKind> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_planner_kind(item));
  if (out.empty()) throw InvalidArgument("no planner variants given");
  return out;
}

}  // namespace rftbd
