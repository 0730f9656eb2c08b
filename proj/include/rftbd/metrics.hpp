// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace rftbd {

struct OspaParams {
  double order = 1.0;     // p
  double cutoff = 100.0;  // c, meters
};

struct OspaResult {
  double total = 0.0;
  double localization = 0.0;
  double cardinality = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (rows <= cols)
/// by shortest augmenting paths. Returns the column of each row.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

/// OSPA distance between two planar point sets with its localization and
/// cardinality parts (total^p = loc^p + card^p).
OspaResult ospa(std::span<const Eigen::Vector2d> x, std::span<const Eigen::Vector2d> y,
                const OspaParams& params = {});

struct SeriesSummary {
  std::vector<double> mean;
  std::vector<double> q05;
  std::vector<double> q95;
  double overall_mean = 0.0;
};

/// Linear-interpolated sample quantile (type 7).
double quantile(std::vector<double> values, double q);

/// Pointwise mean and 5 % / 95 % quantiles over runs of equal length.
SeriesSummary aggregate_runs(const std::vector<std::vector<double>>& runs);

}  // namespace rftbd
