// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace rftbd;

using test::ospa_brute_force;
using test::Points;
using test::random_points;

TEST_SUITE("metrics") {
  TEST_CASE("OSPA examples") {
    const Points x{{0, 0}, {10, 0}};
    const Points y{{0, 3}, {10, 4}};
    CHECK(ospa(x, y).total == doctest::Approx(3.5).epsilon(1e-14));
    CHECK(ospa(x, y).cardinality == 0.0);
    CHECK(ospa(x, x).total == 0.0);
    const Points one{{0, 0}};
    const OspaResult e = ospa(one, Points{});
    CHECK(e.total == 100.0);
    CHECK(e.cardinality == 100.0);
    CHECK(e.localization == 0.0);
    CHECK(ospa(Points{}, Points{}).total == 0.0);
    CHECK_THROWS_AS(ospa(x, y, {0.5, 100.0}), InvalidArgument);
    CHECK_THROWS_AS(ospa(x, y, {1.0, 0.0}), InvalidArgument);
  }

  TEST_CASE("components combine to the total") {
    Rng rng(4);
    for (double p : {1.0, 2.0, 3.0})
      for (int t = 0; t < 50; ++t) {
        const Points x = random_points(1 + t % 4, rng), y = random_points(t % 6, rng);
        const OspaResult r = ospa(x, y, {p, 100.0});
        CHECK(std::pow(r.total, p) ==
              doctest::Approx(std::pow(r.localization, p) + std::pow(r.cardinality, p)).epsilon(1e-12));
      }
  }

  TEST_CASE("assignment matches brute force up to six points") {
    Rng rng(5);
    for (double p : {1.0, 2.0})
      for (std::size_t nx = 0; nx <= 6; ++nx)
        for (std::size_t ny = 0; ny <= 6; ++ny) {
          const Points x = random_points(nx, rng), y = random_points(ny, rng);
          CHECK(ospa(x, y, {p, 100.0}).total ==
                doctest::Approx(ospa_brute_force(x, y, p, 100.0)).epsilon(1e-12).scale(1.0));
        }
    Eigen::MatrixXd cost(2, 3);
    cost << 4, 1, 3, 2, 0, 5;
    const auto cols = min_cost_assignment(cost);
    CHECK(cols == std::vector<int>{1, 0});
    CHECK_THROWS_AS(min_cost_assignment(cost.transpose()), InvalidArgument);
  }

  TEST_CASE("OSPA is a bounded metric") {
    Rng rng(6);
    const OspaParams params{1.0, 100.0};
    for (int t = 0; t < 10000; ++t) {
      const Points a = random_points(t % 5, rng, 300.0);
      const Points b = random_points((t / 5) % 5, rng, 300.0);
      const Points c = random_points((t / 25) % 5, rng, 300.0);
      const double ab = ospa(a, b, params).total;
      const double ba = ospa(b, a, params).total;
      const double bc = ospa(b, c, params).total;
      const double ac = ospa(a, c, params).total;
      REQUIRE(ab == ba);
      REQUIRE(ac <= ab + bc + 1e-9);
      REQUIRE(ab <= 100.0 + 1e-12);
      REQUIRE(ab >= 0.0);
    }
  }

  TEST_CASE("quantiles and run aggregation") {
    CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
    CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({5}, 0.95) == 5.0);
    CHECK_THROWS_AS(quantile({}, 0.5), InvalidArgument);
    CHECK_THROWS_AS(quantile({1}, 1.5), InvalidArgument);

    const std::vector<double> run{1.0, 4.0, 2.0};
    const SeriesSummary one = aggregate_runs({run});
    CHECK(one.mean == run);
    CHECK(one.q05 == run);
    CHECK(one.overall_mean == doctest::Approx(7.0 / 3.0));

    const SeriesSummary two = aggregate_runs({{2, 2, 2}, {6, 6, 6}});
    for (double m : two.mean) CHECK(m == 4.0);
    CHECK(two.overall_mean == 4.0);

    CHECK_THROWS_AS(aggregate_runs({}), InvalidArgument);
    CHECK_THROWS_AS(aggregate_runs({{1, 2}, {1}}), InvalidArgument);

    // 100 unit-variance noise runs: the pointwise mean stays within 3 sigma / 10.
    Rng rng(7);
    std::vector<std::vector<double>> runs(100, std::vector<double>(50));
    for (auto& r : runs)
      for (double& v : r) v = 5.0 + rng.normal();
    const SeriesSummary many = aggregate_runs(runs);
    int outside = 0;
    for (double m : many.mean) outside += std::abs(m - 5.0) > 0.3;
    CHECK(outside <= 1);
    CHECK(std::abs(many.overall_mean - 5.0) < 3.0 / std::sqrt(5000.0));
    for (std::size_t k = 0; k < 50; ++k) CHECK(many.q05[k] < many.mean[k]);
    for (std::size_t k = 0; k < 50; ++k) CHECK(many.q95[k] > many.mean[k]);
  }
}
