// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/belief.hpp"

#include <cmath>
#include <numeric>

namespace rftbd {

double BernoulliComponent::effective_sample_size() const {
  double s2 = 0.0;
  for (double w : weights) s2 += w * w;
  return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

void BernoulliComponent::normalize_weights() {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("component " + std::to_string(label) + ": weights sum to zero");
  for (double& w : weights) w /= total;
}

}  // namespace rftbd
