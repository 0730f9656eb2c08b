// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/bessel.hpp"

#include "rftbd/types.hpp"

#include <cmath>

namespace rftbd {

namespace {

constexpr double kSeriesLimit = 15.0;

// I_0(x) = sum_k (x^2/4)^k / (k!)^2.
double i0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// I_0(x) e^{-x} sqrt(2 pi x) = sum_k ((2k-1)!!)^2 / (k! (8x)^k), truncated at
// its smallest term.
double i0_asymptotic_factor(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * x * k);
    if (next >= term) break;
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

double log_i0(double x) {
  if (std::isnan(x) || x < 0.0) throw InvalidArgument("log_i0: argument must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;
  if (x < kSeriesLimit) return std::log(i0_series(x));
  return x - 0.5 * std::log(2.0 * kPi * x) + std::log(i0_asymptotic_factor(x));
}

}  // namespace rftbd
