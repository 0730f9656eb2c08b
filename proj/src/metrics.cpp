// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/metrics.hpp"

#include "rftbd/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rftbd {

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  if (n > m) throw InvalidArgument("min_cost_assignment: more rows than columns");
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Potentials u (rows), v (columns); column 0 is a virtual source.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> row_of(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    row_of[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = row_of[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const int j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col_of(n, -1);
  for (int j = 1; j <= m; ++j)
    if (row_of[j] != 0) col_of[row_of[j] - 1] = j - 1;
  return col_of;
}

OspaResult ospa(std::span<const Eigen::Vector2d> x, std::span<const Eigen::Vector2d> y,
                const OspaParams& params) {
  if (!(params.order >= 1.0)) throw InvalidArgument("ospa: order must be >= 1");
  if (!(params.cutoff > 0.0)) throw InvalidArgument("ospa: cutoff must be positive");
  // Equal-size sets are oriented canonically so that ospa(x, y) and
  // ospa(y, x) run the same arithmetic.
  const auto before = [](std::span<const Eigen::Vector2d> a, std::span<const Eigen::Vector2d> b) {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(), [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
          return u.x() < v.x() || (u.x() == v.x() && u.y() < v.y());
        });
  };
  const bool swap = x.size() != y.size() ? x.size() > y.size() : before(y, x);
  const auto& small = swap ? y : x;
  const auto& large = swap ? x : y;
  const std::size_t n = large.size();
  OspaResult r;
  if (n == 0) return r;
  const double p = params.order;
  const double c = params.cutoff;
  Eigen::MatrixXd cost(small.size(), large.size());
  for (std::size_t i = 0; i < small.size(); ++i)
    for (std::size_t j = 0; j < large.size(); ++j)
      cost(i, j) = std::pow(std::min((small[i] - large[j]).norm(), c), p);
  double loc = 0.0;
  const auto assign = min_cost_assignment(cost);
  for (std::size_t i = 0; i < small.size(); ++i) loc += cost(i, assign[i]);
  const double card = std::pow(c, p) * static_cast<double>(n - small.size());
  const double nd = static_cast<double>(n);
  r.localization = std::pow(loc / nd, 1.0 / p);
  r.cardinality = std::pow(card / nd, 1.0 / p);
  r.total = std::pow((loc + card) / nd, 1.0 / p);
  return r;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SeriesSummary aggregate_runs(const std::vector<std::vector<double>>& runs) {
  if (runs.empty()) throw InvalidArgument("aggregate_runs: no runs");
  const std::size_t len = runs.front().size();
  for (const auto& r : runs)
    if (r.size() != len) throw InvalidArgument("aggregate_runs: runs differ in length");
  SeriesSummary s;
  s.mean.resize(len);
  s.q05.resize(len);
  s.q95.resize(len);
  std::vector<double> column(runs.size());
  double grand = 0.0;
  for (std::size_t t = 0; t < len; ++t) {
    double sum = 0.0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      column[k] = runs[k][t];
      sum += column[k];
    }
    s.mean[t] = sum / static_cast<double>(runs.size());
    s.q05[t] = quantile(column, 0.05);
    s.q95[t] = quantile(column, 0.95);
    grand += s.mean[t];
  }
  s.overall_mean = len > 0 ? grand / static_cast<double>(len) : 0.0;
  return s;
}

}  // namespace rftbd
