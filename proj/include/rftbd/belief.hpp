// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "rftbd/types.hpp"

#include <map>
#include <vector>

namespace rftbd {

/// One labeled Bernoulli component: existence probability and a weighted
/// particle approximation of the single-object density.
struct BernoulliComponent {
  Label label = 0;
  double existence = 0.0;
  std::vector<Particle> particles;
  std::vector<double> weights;  // sums to one

  [[nodiscard]] std::size_t size() const { return particles.size(); }
  /// 1 / sum(w^2).
  [[nodiscard]] double effective_sample_size() const;
  /// Rescales weights to sum to one; throws NumericalError if they sum to zero.
  void normalize_weights();
};

/// Labeled multi-Bernoulli density. Components are keyed (and iterated) by label.
struct LmbBelief {
  std::map<Label, BernoulliComponent> components;

  [[nodiscard]] bool empty() const { return components.empty(); }
  [[nodiscard]] std::size_t size() const { return components.size(); }
};

}  // namespace rftbd
