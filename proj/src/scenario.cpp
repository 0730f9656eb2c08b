// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace rftbd {

using nlohmann::json;

namespace {

// Reads keys from a JSON object and rejects keys it never consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidArgument(where_ + ": expected an object");
  }

  /// Throws if the object holds a key that was never read.
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.contains(key)) throw InvalidArgument(where_ + ": unknown key '" + key + "'");
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw InvalidArgument(where_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument(where_ + "." + key + ": " + e.what());
    }
  }

  void get_db(const std::string& key, double& linear) {
    if (!j_.contains(key)) return;
    double db = 0.0;
    get(key, db);
    linear = db_to_amplitude(db);
  }

  template <typename F>
  void get_with(const std::string& key, F&& parse) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    parse(j_.at(key), where_ + "." + key);
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

Kinematics read_vec4(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw InvalidArgument(where + ": expected 4 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json vec4(const Kinematics& v) { return json::array({v[0], v[1], v[2], v[3]}); }

// Written with 12 significant digits so that dB -> linear -> dB is stable.
double to_db(double linear) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", 20.0 * std::log10(linear));
  return std::strtod(buf, nullptr);
}

TransmitterParams read_tx(const json& j, const std::string& where) {
  TransmitterParams tx;
  ObjectReader r(j, where);
  r.get("amplitude", tx.amplitude);
  r.get("baseband_freq", tx.baseband_freq);
  r.get("phase", tx.phase);
  r.get("pulse_period", tx.pulse_period);
  r.get("pulse_width", tx.pulse_width);
  r.get("offset", tx.offset);
  r.finish();
  return tx;
}

json write_tx(const TransmitterParams& tx) {
  return {{"amplitude", tx.amplitude}, {"baseband_freq", tx.baseband_freq}, {"phase", tx.phase},
          {"pulse_period", tx.pulse_period}, {"pulse_width", tx.pulse_width},
          {"offset", tx.offset}};
}

ReceiverParams read_rx(const json& j, const std::string& where) {
  ReceiverParams rx;
  ObjectReader r(j, where);
  r.get("center_freq", rx.center_freq);
  r.get("sample_rate", rx.sample_rate);
  r.get_db("gain_db", rx.gain);
  r.get("ref_distance", rx.ref_distance);
  r.get("path_loss", rx.path_loss);
  r.get_with("path_loss_law", [&](const json& v, const std::string&) {
    rx.path_loss_law = parse_path_loss_law(v.get<std::string>());
  });
  r.get("noise_cov", rx.noise_cov);
  r.get_with("window", [&](const json& v, const std::string&) {
    rx.window = parse_window_kind(v.get<std::string>());
  });
  r.get("window_width", rx.window_width);
  r.get("fft_len", rx.fft_len);
  r.get("hop", rx.hop);
  r.get("frames", rx.frames);
  r.get("interval", rx.interval);
  r.get_with("antenna", [&](const json& v, const std::string& w) {
    ObjectReader a(v, w);
    a.get("isotropic", rx.antenna.isotropic);
    a.get_db("gain_max_db", rx.antenna.gain_max);
    a.get("back_ratio", rx.antenna.back_ratio);
    a.get("exponent", rx.antenna.exponent);
    a.finish();
  });
  r.finish();
  return rx;
}

json write_rx(const ReceiverParams& rx) {
  return {{"center_freq", rx.center_freq},
          {"sample_rate", rx.sample_rate},
          {"gain_db", to_db(rx.gain)},
          {"ref_distance", rx.ref_distance},
          {"path_loss", rx.path_loss},
          {"path_loss_law", std::string(to_string(rx.path_loss_law))},
          {"noise_cov", rx.noise_cov},
          {"window", std::string(to_string(rx.window))},
          {"window_width", rx.window_width},
          {"fft_len", rx.fft_len},
          {"hop", rx.hop},
          {"frames", rx.frames},
          {"interval", rx.interval},
          {"antenna",
           {{"isotropic", rx.antenna.isotropic},
            {"gain_max_db", to_db(rx.antenna.gain_max)},
            {"back_ratio", rx.antenna.back_ratio},
            {"exponent", rx.antenna.exponent}}}};
}

ObjectSpec read_object(const json& j, const std::string& where) {
  ObjectSpec o;
  ObjectReader r(j, where);
  r.get("label", o.label);
  r.get("birth", o.birth);
  r.get("death", o.death);
  o.initial = read_vec4(r.at("initial"), where + ".initial");
  r.get_with("initial_mode", [&](const json& v, const std::string&) {
    o.initial_mode = parse_mode(v.get<std::string>());
  });
  r.get_with("schedule", [&](const json& v, const std::string& w) {
    if (!v.is_array()) throw InvalidArgument(w + ": expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      ObjectReader s(v[i], w + "[" + std::to_string(i) + "]");
      ModeSwitch sw;
      s.get("time", sw.time);
      sw.mode = parse_mode(s.at("mode").get<std::string>());
      s.finish();
      o.schedule.push_back(sw);
    }
  });
  o.tx = read_tx(r.at("transmitter"), where + ".transmitter");
  r.finish();
  return o;
}

json write_object(const ObjectSpec& o) {
  json schedule = json::array();
  for (const auto& s : o.schedule)
    schedule.push_back({{"time", s.time}, {"mode", std::string(to_string(s.mode))}});
  return {{"label", o.label},
          {"birth", o.birth},
          {"death", o.death},
          {"initial", vec4(o.initial)},
          {"initial_mode", std::string(to_string(o.initial_mode))},
          {"schedule", schedule},
          {"transmitter", write_tx(o.tx)}};
}

BirthSpec read_birth(const json& j, const std::string& where) {
  BirthSpec b;
  ObjectReader r(j, where);
  r.get("label", b.label);
  r.get("existence", b.existence);
  b.mean = read_vec4(r.at("mean"), where + ".mean");
  r.get_with("cov_diag", [&](const json& v, const std::string& w) {
    b.cov = read_vec4(v, w).asDiagonal();
  });
  r.get("mode_prob", b.mode_prob);
  r.get("tau_mean", b.tau_mean);
  r.get("tau_sd", b.tau_sd);
  r.finish();
  return b;
}

json write_birth(const BirthSpec& b) {
  return {{"label", b.label},
          {"existence", b.existence},
          {"mean", vec4(b.mean)},
          {"cov_diag", vec4(b.cov.diagonal())},
          {"mode_prob", b.mode_prob},
          {"tau_mean", b.tau_mean},
          {"tau_sd", b.tau_sd}};
}

ScenarioConfig read_config(const json& j) {
  ScenarioConfig c;
  ObjectReader r(j, "config");
  r.get("name", c.name);
  r.get("seed", c.seed);
  r.get("duration", c.duration);
  r.get("object_height", c.object_height);
  r.get_with("region", [&](const json& v, const std::string& w) {
    ObjectReader g(v, w);
    g.get("x_min", c.region.x_min);
    g.get("x_max", c.region.x_max);
    g.get("y_min", c.region.y_min);
    g.get("y_max", c.region.y_max);
    g.finish();
  });
  r.get_with("uav", [&](const json& v, const std::string& w) {
    ObjectReader u(v, w);
    u.get_with("position", [&](const json& p, const std::string& pw) {
      if (!p.is_array() || p.size() != 3) throw InvalidArgument(pw + ": expected 3 numbers");
      c.uav_start.position = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
    });
    u.get("heading", c.uav_start.heading);
    u.get("speed", c.uav.speed);
    u.get("max_turn_rate", c.uav.max_turn_rate);
    u.finish();
  });
  r.get_with("receiver", [&](const json& v, const std::string& w) { c.rx = read_rx(v, w); });
  r.get_with("objects", [&](const json& v, const std::string& w) {
    if (!v.is_array()) throw InvalidArgument(w + ": expected an array");
    for (std::size_t i = 0; i < v.size(); ++i)
      c.objects.push_back(read_object(v[i], w + "[" + std::to_string(i) + "]"));
  });
  r.get_with("dynamics", [&](const json& v, const std::string& w) {
    ObjectReader d(v, w);
    d.get("cv_sigma", c.dynamics.cv_sigma);
    d.get("wd_pos_var", c.dynamics.wd_pos_var);
    d.get("wd_vel_var", c.dynamics.wd_vel_var);
    d.get("mode_stay", c.dynamics.mode_stay);
    d.get("tau_sigma", c.dynamics.tau_sigma);
    d.get("survival", c.dynamics.survival);
    d.finish();
  });
  r.get_with("truth", [&](const json& v, const std::string& w) {
    ObjectReader t(v, w);
    t.get("process_noise", c.truth_process_noise);
    t.get_with("modes", [&](const json& m, const std::string& mw) {
      const auto s = m.get<std::string>();
      if (s == "scripted") c.truth_modes = TruthModes::Scripted;
      else if (s == "markov") c.truth_modes = TruthModes::Markov;
      else throw InvalidArgument(mw + ": expected 'scripted' or 'markov'");
    });
    t.finish();
  });
  r.get_with("filter", [&](const json& v, const std::string& w) {
    ObjectReader f(v, w);
    f.get("particles", c.filter.particles);
    f.get("extract_threshold", c.filter.extract_threshold);
    f.get("prune_threshold", c.filter.prune_threshold);
    f.get("resample_fraction", c.filter.resample_fraction);
    f.get("existence_floor", c.filter.existence_floor);
    f.get("roughening", c.filter.roughening);
    f.finish();
  });
  r.get_with("births", [&](const json& v, const std::string& w) {
    if (!v.is_array()) throw InvalidArgument(w + ": expected an array");
    for (std::size_t i = 0; i < v.size(); ++i)
      c.births.push_back(read_birth(v[i], w + "[" + std::to_string(i) + "]"));
  });
  r.get_with("planner", [&](const json& v, const std::string& w) {
    ObjectReader p(v, w);
    auto& pc = c.planning;
    p.get_with("kind", [&](const json& k, const std::string&) {
      c.planner = parse_planner_kind(k.get<std::string>());
    });
    p.get("alpha", pc.alpha);
    p.get("kernel_volume", pc.kernel_volume);
    p.get("horizon", pc.horizon);
    p.get("plan_interval", pc.plan_interval);
    p.get("discount", pc.discount);
    p.get("void_threshold", pc.void_threshold);
    p.get("void_radius", pc.void_radius);
    p.get("heading_grid", pc.heading_grid);
    p.get("extract_threshold", pc.extract_threshold);
    p.get("min_existence", pc.min_existence);
    p.get_with("pims", [&](const json& m, const std::string& mw) {
      const auto s = m.get<std::string>();
      if (s == "extracted") pc.pims = PimsEstimate::Extracted;
      else if (s == "sampled") pc.pims = PimsEstimate::Sampled;
      else throw InvalidArgument(mw + ": expected 'extracted' or 'sampled'");
    });
    p.finish();
  });
  r.get_with("ospa", [&](const json& v, const std::string& w) {
    ObjectReader o(v, w);
    o.get("order", c.ospa.order);
    o.get("cutoff", c.ospa.cutoff);
    o.finish();
  });
  r.finish();
  c.dynamics.period = c.rx.interval;
  c.planning.divergence =
      c.planner == PlannerKind::CauchySchwarz ? DivergenceKind::CauchySchwarz : DivergenceKind::Renyi;
  return c;
}

}  // namespace

int ScenarioConfig::steps() const {
  return static_cast<int>(std::floor(duration / period() + 1e-9));
}

SensorSetup ScenarioConfig::sensor() const {
  SensorSetup s;
  s.rx = rx;
  s.object_height = object_height;
  for (const auto& o : objects) {
    if (s.tx.contains(o.label)) continue;
    s.tx.emplace(o.label, o.tx);
  }
  return s;
}

void ScenarioConfig::validate() const {
  if (!(duration >= 0.0)) throw InvalidArgument("config: duration must be >= 0");
  if (!(region.x_max > region.x_min && region.y_max > region.y_min))
    throw InvalidArgument("config: empty region");
  if (!(uav.speed >= 0.0) || !(uav.max_turn_rate >= 0.0))
    throw InvalidArgument("config: UAV speed and turn rate must be >= 0");
  rx.validate();
  std::set<Label> labels;
  std::set<double> freqs;
  for (const auto& o : objects) {
    const std::string who = "config: object " + std::to_string(o.label);
    if (!labels.insert(o.label).second) throw InvalidArgument(who + " is listed twice");
    if (!freqs.insert(o.tx.baseband_freq).second)
      throw InvalidArgument(who + " reuses a baseband frequency");
    if (!(o.birth >= 0.0 && o.birth <= o.death)) throw InvalidArgument(who + ": need 0 <= birth <= death");
    o.tx.validate();
    double last = -INFINITY;
    for (const auto& s : o.schedule) {
      if (!(s.time >= last)) throw InvalidArgument(who + ": schedule must be sorted by time");
      last = s.time;
    }
    if (!o.initial.allFinite()) throw InvalidArgument(who + ": non-finite initial state");
  }
  for (const auto& b : births)
    if (!labels.contains(b.label))
      throw InvalidArgument("config: birth label " + std::to_string(b.label) + " has no transmitter");
  if (filter.particles < 1) throw InvalidArgument("config: filter needs at least one particle");
  if (!(filter.roughening >= 0.0)) throw InvalidArgument("config: roughening must be >= 0");
  planning.validate();
  JmsModel check(dynamics);
  (void)check;
  if (std::abs(dynamics.period - period()) > 1e-12)
    throw InvalidArgument("config: dynamics period must equal the measurement interval");
  if (!(ospa.order >= 1.0 && ospa.cutoff > 0.0)) throw InvalidArgument("config: invalid OSPA params");
}

ScenarioConfig four_object_scenario() {
  ScenarioConfig c;
  c.name = "four_objects";
  c.duration = 400.0;
  c.uav_start.position = {0.0, 0.0, 30.0};
  c.uav_start.heading = kPi / 4.0;
  c.rx.path_loss_law = PathLossLaw::Power;
  struct Row {
    double birth, death;
    Kinematics x;
    double freq, tau, switch_after;
  };
  const Row rows[] = {
      {1, 250, {800, 0.13, 300, -1.44}, 131e3, 0.1, 1.0},
      {50, 300, {200, 0.18, 700, -2.17}, 201e3, 0.2, 65.0},
      {100, 350, {1200, -1.94, 1000, 0.42}, 401e3, 0.3, 1.0},
      {150, 400, {900, 1.91, 1300, -2.04}, 841e3, 0.4, 65.0},
  };
  Label label = 1;
  for (const auto& r : rows) {
    ObjectSpec o;
    o.label = label;
    o.birth = r.birth;
    o.death = r.death;
    o.initial = r.x;
    o.initial_mode = Mode::Wandering;
    o.schedule.push_back({r.birth + r.switch_after, Mode::ConstantVelocity});
    o.tx.baseband_freq = r.freq;
    o.tx.offset = r.tau;
    c.objects.push_back(o);
    BirthSpec b;
    b.label = label;
    b.mean = {r.x[0], 0.0, r.x[2], 0.0};
    c.births.push_back(b);
    ++label;
  }
  return c;
}

ScenarioConfig single_object_scenario() {
  ScenarioConfig c = four_object_scenario();
  c.name = "single_object";
  c.duration = 100.0;
  c.rx.noise_cov = 0.015 * 0.015;
  c.objects.resize(1);
  c.births.resize(1);
  auto& o = c.objects[0];
  o.birth = 1.0;
  o.death = 101.0;
  o.initial = {800.0, 1.5, 300.0, 1.0};
  o.initial_mode = Mode::ConstantVelocity;
  o.schedule.clear();
  c.births[0].mean = {800.0, 0.0, 300.0, 0.0};
  return c;
}

ScenarioConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
  }
  return read_config(j);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ScenarioConfig& c) {
  json objects = json::array();
  for (const auto& o : c.objects) objects.push_back(write_object(o));
  json births = json::array();
  for (const auto& b : c.births) births.push_back(write_birth(b));
  const auto& p = c.planning;
  json j = {
      {"name", c.name},
      {"seed", c.seed},
      {"duration", c.duration},
      {"object_height", c.object_height},
      {"region",
       {{"x_min", c.region.x_min}, {"x_max", c.region.x_max}, {"y_min", c.region.y_min},
        {"y_max", c.region.y_max}}},
      {"uav",
       {{"position", {c.uav_start.position.x(), c.uav_start.position.y(), c.uav_start.position.z()}},
        {"heading", c.uav_start.heading},
        {"speed", c.uav.speed},
        {"max_turn_rate", c.uav.max_turn_rate}}},
      {"receiver", write_rx(c.rx)},
      {"objects", objects},
      {"dynamics",
       {{"cv_sigma", c.dynamics.cv_sigma}, {"wd_pos_var", c.dynamics.wd_pos_var},
        {"wd_vel_var", c.dynamics.wd_vel_var}, {"mode_stay", c.dynamics.mode_stay},
        {"tau_sigma", c.dynamics.tau_sigma}, {"survival", c.dynamics.survival}}},
      {"truth",
       {{"process_noise", c.truth_process_noise},
        {"modes", c.truth_modes == TruthModes::Scripted ? "scripted" : "markov"}}},
      {"filter",
       {{"particles", c.filter.particles}, {"extract_threshold", c.filter.extract_threshold},
        {"prune_threshold", c.filter.prune_threshold},
        {"resample_fraction", c.filter.resample_fraction},
        {"existence_floor", c.filter.existence_floor},
        {"roughening", c.filter.roughening}}},
      {"births", births},
      {"planner",
       {{"kind", std::string(to_string(c.planner))}, {"alpha", p.alpha},
        {"kernel_volume", p.kernel_volume}, {"horizon", p.horizon},
        {"plan_interval", p.plan_interval}, {"discount", p.discount},
        {"void_threshold", p.void_threshold}, {"void_radius", p.void_radius},
        {"heading_grid", p.heading_grid}, {"extract_threshold", p.extract_threshold},
        {"min_existence", p.min_existence},
        {"pims", p.pims == PimsEstimate::Extracted ? "extracted" : "sampled"}}},
      {"ospa", {{"order", c.ospa.order}, {"cutoff", c.ospa.cutoff}}},
  };
  return j.dump(2);
}

}  // namespace rftbd
