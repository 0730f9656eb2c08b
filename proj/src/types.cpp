// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/types.hpp"

#include <cmath>

namespace rftbd {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Wandering: return "wandering";
    case Mode::ConstantVelocity: return "constant_velocity";
  }
  return "unknown";
}

Mode parse_mode(std::string_view s) {
  if (s == "wandering" || s == "wd") return Mode::Wandering;
  if (s == "constant_velocity" || s == "cv") return Mode::ConstantVelocity;
  throw InvalidArgument("unknown mode: " + std::string(s));
}

double normalize_angle(double a) {
  if (!std::isfinite(a)) throw InvalidArgument("normalize_angle: non-finite angle");
  double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

}  // namespace rftbd
