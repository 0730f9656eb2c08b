// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/bessel.hpp"
#include "rftbd/likelihood.hpp"
#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include <cmath>
#include <complex>

using namespace rftbd;
using test::brute_force_log_density;
using test::desk_setup;
using test::window_response_direct;

namespace {

// log I0(x) = x + log((1/pi) int_0^pi exp(x (cos t - 1)) dt).
double log_i0_quadrature(double x) {
  auto f = [x](double t) { return std::exp(x * (std::cos(t) - 1.0)); };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, kPi, 15, 1e-14);
  return x + std::log(integral / kPi);
}

}  // namespace

TEST_SUITE("likelihood") {
  TEST_CASE("log I0 matches quadrature") {
    for (double x : {0.0, 1e-8, 0.3, 1.0, 5.0, 14.9, 15.0, 15.1, 30.0, 80.0, 250.0, 700.0, 2000.0})
      CHECK(log_i0(x) == doctest::Approx(log_i0_quadrature(x)).epsilon(1e-10).scale(1.0));
    CHECK(log_i0(0.0) == 0.0);
    CHECK_THROWS(log_i0(-1.0));
    CHECK_THROWS(log_i0(NAN));
    CHECK(std::isfinite(log_i0(1e6)));
  }

  TEST_CASE("Rice density integrates to one") {
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (double nu : {0.0, 0.5, 2.0, 6.0}) {
      const double s2 = 0.7;
      const double mass = integrator.integrate(
          [&](double z) { return ricean_pdf(z, nu, s2); }, 0.0, nu + 40.0 * std::sqrt(s2));
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("Rice with zero signal is Rayleigh, and the ratio is their difference") {
    const double s2 = 0.04;
    for (double z : {0.01, 0.1, 0.3, 0.9}) {
      CHECK(ricean_pdf(z, 0.0, s2) == doctest::Approx(rayleigh_pdf(z, s2)).epsilon(1e-14));
      for (double nu : {0.0, 0.05, 0.4}) {
        const double direct = log_ricean_pdf(z, nu, s2) - log_rayleigh_pdf(z, s2);
        CHECK(log_likelihood_ratio(z, nu, s2) == doctest::Approx(direct).epsilon(1e-12));
      }
    }
    // Rayleigh mode sits at sigma.
    const double sigma = std::sqrt(s2);
    CHECK(rayleigh_pdf(sigma, s2) > rayleigh_pdf(sigma * 0.99, s2));
    CHECK(rayleigh_pdf(sigma, s2) > rayleigh_pdf(sigma * 1.01, s2));
    CHECK(log_likelihood_ratio(0.0, 0.3, s2) == doctest::Approx(-0.3 * 0.3 / (2 * s2)));
    CHECK_THROWS(log_ricean_pdf(-1.0, 0.1, s2));
    CHECK_THROWS(log_rayleigh_pdf(0.1, 0.0));
  }

  TEST_CASE("noise covariance in the frequency domain") {
    const SensorSetup s = desk_setup();
    const MeasurementModel model(s);
    double energy = 0.0;
    for (double c : model.window().coefficients) energy += c * c;
    CHECK(model.noise_freq_cov() == doctest::Approx(energy * s.rx.noise_cov / 2.0).epsilon(1e-14));
    CHECK(model.frames() == 8);
    CHECK(model.bins() == 32);
  }

  TEST_CASE("influence regions and expected magnitudes") {
    const SensorSetup s = desk_setup();
    const MeasurementModel model(s);
    const double tau = 250.0 / s.rx.sample_rate;  // ceil(250 / 100) = 3
    const InfluenceRegion r1 = model.influence_region(1, tau);
    CHECK(r1.frame_first == 3);
    CHECK(r1.frame_last == 5);
    CHECK(r1.bin_first == 3);
    CHECK(r1.bin_last == 7);
    CHECK_FALSE(r1.overlaps(model.influence_region(2, tau)));
    CHECK(r1.overlaps(model.influence_region(1, 150.0 / s.rx.sample_rate)));
    const InfluenceRegion tail = model.influence_region(1, 790.0 / s.rx.sample_rate);
    CHECK(tail.frame_first == 8);
    CHECK(tail.empty());

    ObjectState x;
    x.label = 1;
    x.tau = tau;
    x.x << 30.0, 0.0, 40.0, 0.0;
    UavState u;
    u.position = {0, 0, 1};
    const double gamma = received_magnitude(object_position(x, 1.0), u, s.rx, s.tx.at(1));
    for (int l = 0; l < 32; ++l) {
      const double expect =
          l >= 3 && l < 7 ? gamma * window_response_direct(model.window().coefficients, l - 5.3, 32) : 0.0;
      CHECK(model.expected_bin_magnitude(x, u, 3, l) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(model.expected_bin_magnitude(x, u, 5, l) == 0.0);
    }
  }

  TEST_CASE("separable likelihood equals the brute-force full product") {
    const SensorSetup s = desk_setup();
    const MeasurementModel model(s);
    Rng rng(2024);
    const double sd = std::sqrt(model.noise_freq_cov());
    for (int draw = 0; draw < 100; ++draw) {
      ObjectState a, b;
      a.label = 1;
      b.label = 2;
      a.tau = rng.uniform() * s.rx.interval;
      b.tau = rng.uniform() * s.rx.interval;
      a.x << 20.0 + 60.0 * rng.uniform(), 0.0, 20.0 + 60.0 * rng.uniform(), 0.0;
      b.x << 20.0 + 60.0 * rng.uniform(), 0.0, 20.0 + 60.0 * rng.uniform(), 0.0;
      UavState u;
      u.position = {rng.uniform() * 10.0, rng.uniform() * 10.0, 5.0};
      Spectrogram z(8, 32);
      for (double& v : z.mag) v = sd * std::hypot(rng.normal(), rng.normal()) + 0.05 * rng.uniform();
      const ObjectState both[] = {a, b};
      const double full = brute_force_log_density(both, z, u, s) - brute_force_log_density({}, z, u, s);
      const double sep = model.log_likelihood(a, z, u) + model.log_likelihood(b, z, u);
      CHECK(sep == doctest::Approx(full).epsilon(1e-9).scale(1.0));
      CHECK(model.multi_object_log_likelihood(both, z, u) == doctest::Approx(sep).epsilon(1e-12));
    }
  }

  TEST_CASE("overlapping influence regions are rejected") {
    const SensorSetup s = desk_setup();
    const MeasurementModel model(s);
    ObjectState a;
    a.label = 1;
    a.x << 50, 0, 50, 0;
    const ObjectState pair[] = {a, a};
    Spectrogram z(8, 32);
    UavState u;
    CHECK_THROWS_AS((void)model.multi_object_log_likelihood(pair, z, u), InvalidArgument);
    CHECK_THROWS_AS((void)model.log_likelihood(a, Spectrogram(7, 32), u), InvalidArgument);
  }

  TEST_CASE("ideal measurement holds expected magnitudes only") {
    const SensorSetup s = desk_setup();
    const MeasurementModel model(s);
    ObjectState a;
    a.label = 2;
    a.tau = 0.0;
    a.x << 60, 0, 10, 0;
    UavState u;
    const Spectrogram z = model.ideal_measurement(std::span(&a, 1), u);
    for (int m = 0; m < 8; ++m)
      for (int l = 0; l < 32; ++l)
        CHECK(z.at(m, l) == doctest::Approx(model.expected_bin_magnitude(a, u, m, l)).epsilon(1e-14));
  }

  TEST_CASE("serial and parallel particle likelihoods agree exactly") {
    SensorSetup s;
    s.rx.path_loss_law = PathLossLaw::Power;
    s.tx[1].offset = 0.2;
    const MeasurementModel model(s);
    Rng rng(9);
    std::vector<Particle> ps(500);
    for (auto& p : ps) {
      p.x << 500 + 200 * rng.uniform(), 0, 500 + 200 * rng.uniform(), 0;
      p.tau = rng.uniform();
    }
    Spectrogram z(model.frames(), model.bins());
    for (double& v : z.mag) v = 0.2 * std::hypot(rng.normal(), rng.normal());
    UavState u;
    u.position = {400, 400, 30};
    std::vector<double> a(ps.size()), b(ps.size());
    model.log_likelihoods(1, ps, z, u, a, Exec::Serial);
    model.log_likelihoods(1, ps, z, u, b, Exec::Parallel);
    CHECK(a == b);
  }
}
