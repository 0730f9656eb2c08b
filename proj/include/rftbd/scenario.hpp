// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "rftbd/dynamics.hpp"
#include "rftbd/likelihood.hpp"
#include "rftbd/metrics.hpp"
#include "rftbd/planner.hpp"
#include "rftbd/rf_signal.hpp"
#include "rftbd/tbd_lmb.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rftbd {

struct ModeSwitch {
  double time = 0.0;  // seconds; the mode holds from this time on
  Mode mode = Mode::ConstantVelocity;
};

struct ObjectSpec {
  Label label = 0;
  double birth = 0.0;  // present for birth <= t < death
  double death = 0.0;
  Kinematics initial = Kinematics::Zero();
  Mode initial_mode = Mode::Wandering;
  std::vector<ModeSwitch> schedule;
  TransmitterParams tx;  // tx.offset is the object's pulse offset
};

enum class TruthModes { Scripted, Markov };

struct ScenarioConfig {
  std::string name = "scenario";
  Region region;
  UavState uav_start;
  UavKinematics uav;
  double duration = 200.0;  // seconds
  double object_height = 1.0;
  std::vector<ObjectSpec> objects;
  ReceiverParams rx;
  JmsParams dynamics;
  /// Truth follows the same models; false gives noise-free truth motion.
  bool truth_process_noise = true;
  TruthModes truth_modes = TruthModes::Scripted;
  FilterParams filter;
  std::vector<BirthSpec> births;
  PlannerKind planner = PlannerKind::Renyi;
  PlannerConfig planning;
  OspaParams ospa;
  std::uint64_t seed = 1;

  [[nodiscard]] double period() const { return rx.interval; }
  [[nodiscard]] int steps() const;
  [[nodiscard]] SensorSetup sensor() const;
  /// Throws InvalidArgument describing the first problem found.
  void validate() const;
};

/// The four-object reference scenario.
ScenarioConfig four_object_scenario();
/// One constant-velocity object, lower noise, 100 s.
ScenarioConfig single_object_scenario();

ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ScenarioConfig& cfg);

}  // namespace rftbd
