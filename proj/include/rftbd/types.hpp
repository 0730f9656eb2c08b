// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rftbd {

/// Frequency label of a transmitter. Static for the lifetime of an object.
using Label = int;

/// Dynamic mode of an object.
enum class Mode : int { Wandering = 0, ConstantVelocity = 1 };
inline constexpr int kModeCount = 2;

inline constexpr int mode_index(Mode m) { return static_cast<int>(m); }
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

/// Planar kinematics in the order [p_x, v_x, p_y, v_y].
using Kinematics = Eigen::Vector4d;

/// Unlabeled single-object state; the label is carried by the owner.
struct Particle {
  Kinematics x = Kinematics::Zero();
  Mode mode = Mode::Wandering;
  double tau = 0.0;  // pulse offset within the period, seconds
};

/// Labeled single-object state.
struct ObjectState {
  Kinematics x = Kinematics::Zero();
  Mode mode = Mode::Wandering;
  double tau = 0.0;  // pulse offset within the period, seconds
  Label label = 0;

  [[nodiscard]] Particle particle() const { return {x, mode, tau}; }
  static ObjectState from(const Particle& p, Label l) { return {p.x, p.mode, p.tau, l}; }
};

/// Observer pose. Heading is kept in (-pi, pi].
struct UavState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double heading = 0.0;
};

double normalize_angle(double a);

/// Selects between the OpenMP kernel and its serial reference. Both produce
/// bitwise-identical results; the serial path exists for testing and
/// benchmarking.
enum class Exec { Serial, Parallel };

/// Thrown when a caller violates an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown for numerical failures the caller may want to treat specially.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kPi = std::numbers::pi;

}  // namespace rftbd
