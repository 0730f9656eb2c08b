// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/rf_signal.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <numeric>

using namespace rftbd;
using Complex = std::complex<double>;

namespace {

// Direct O(M N_w L) evaluation of the windowed DFT with absolute sample phase.
StftMatrix direct_stft(std::span<const Complex> y, const ReceiverParams& rx) {
  const Window w = window_coefficients(rx.window, rx.window_width);
  const int frames = rx.frame_count();
  const int bins = rx.fft_len;
  StftMatrix out{frames, bins, std::vector<Complex>(static_cast<std::size_t>(frames) * bins)};
  for (int m = 0; m < frames; ++m)
    for (int l = 0; l < bins; ++l) {
      Complex acc = 0.0;
      for (int n = 0; n < rx.window_width; ++n) {
        const std::int64_t idx = static_cast<std::int64_t>(m) * rx.hop + n;
        const double angle = -2.0 * kPi * static_cast<double>(idx) * l / bins;
        acc += y[idx] * w.coefficients[n] * Complex(std::cos(angle), std::sin(angle));
      }
      out.at(m, l) = acc;
    }
  return out;
}

UavState uav_at(double x, double y, double z, double heading) {
  UavState u;
  u.position = {x, y, z};
  u.heading = heading;
  return u;
}

}  // namespace

TEST_SUITE("rf_signal") {
  TEST_CASE("rectangular window of width four") {
    const Window w = window_coefficients(WindowKind::Rectangular, 4);
    CHECK(w.coefficients == std::vector<double>{1, 1, 1, 1});
    CHECK(w.energy == doctest::Approx(4.0));
    CHECK(w.main_lobe_bins == 2);
  }

  TEST_CASE("main-lobe widths per window family") {
    CHECK(window_coefficients(WindowKind::Hamming, 64).main_lobe_bins == 4);
    CHECK(window_coefficients(WindowKind::Blackman, 64).main_lobe_bins == 6);
    CHECK(window_coefficients(WindowKind::BlackmanHarris4, 64).main_lobe_bins == 8);
    CHECK_THROWS_AS(window_coefficients(WindowKind::Hamming, 1), InvalidArgument);
  }

  TEST_CASE("Hamming energy matches direct summation") {
    const int n = 256;
    double energy = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = 0.54 - 0.46 * std::cos(2.0 * kPi * i / n);
      energy += w * w;
    }
    CHECK(window_coefficients(WindowKind::Hamming, n).energy == doctest::Approx(energy).epsilon(1e-14));
  }

  TEST_CASE("antenna pattern extremes") {
    AntennaPattern pat;
    const UavState u = uav_at(0, 0, 0, 0.0);
    CHECK(antenna_gain({100, 0, 0}, u, pat) == doctest::Approx(pat.gain_max));
    CHECK(antenna_gain({-100, 0, 0}, u, pat) == doctest::Approx(pat.gain_max * pat.back_ratio));
    pat.isotropic = true;
    CHECK(antenna_gain({3, -7, 2}, u, pat) == 1.0);
    CHECK_THROWS(antenna_gain({0, 0, 0}, u, pat));
  }

  TEST_CASE("received magnitude oracles") {
    ReceiverParams rx;
    rx.gain = 1.0;
    rx.path_loss = 2.0;
    rx.path_loss_law = PathLossLaw::Amplitude;
    rx.antenna.isotropic = true;
    TransmitterParams tx;
    tx.amplitude = 0.5;
    const UavState u = uav_at(0, 0, 0, 0.0);
    CHECK(received_magnitude({1, 0, 0}, u, rx, tx) == doctest::Approx(0.5));
    CHECK(received_magnitude({2, 0, 0}, u, rx, tx) == doctest::Approx(0.125));
    CHECK_THROWS_AS(received_magnitude({0.5, 0, 0}, u, rx, tx), InvalidArgument);

    // Reference parameter values at 120 m, both path-loss readings.
    ReceiverParams ref;
    ref.antenna.isotropic = true;
    TransmitterParams rtx;
    const double base = 0.0059 * std::pow(10.0, 72.0 / 20.0);
    CHECK(ref.gain == doctest::Approx(3981.0717055349733));
    CHECK(received_magnitude({120, 0, 0}, u, ref, rtx) ==
          doctest::Approx(base * std::pow(1.0 / 120.0, 3.1068)).epsilon(1e-12));
    ref.path_loss_law = PathLossLaw::Power;
    CHECK(received_magnitude({120, 0, 0}, u, ref, rtx) ==
          doctest::Approx(base * std::pow(1.0 / 120.0, 3.1068 / 2.0)).epsilon(1e-12));

    double last = INFINITY;
    for (double d = 1.0; d < 2000.0; d *= 1.3) {
      const double g = received_magnitude({d, 0, 0}, u, ref, rtx);
      CHECK(g < last);
      last = g;
    }
  }

  TEST_CASE("bin and frame indices") {
    ReceiverParams rx;
    CHECK(freq_bin(131e3, rx) == 16);
    CHECK(time_frame(0.0, rx) == 0);
    CHECK(time_frame(0.009, rx) == 1);
    CHECK(time_frame(0.0090001, rx) == 2);
    const TransmitterParams tx;
    CHECK(static_cast<int>(std::lround(tx.pulse_width * rx.sample_rate / 2.0)) == rx.hop);
    CHECK_THROWS(freq_bin(-1.0, rx));
    CHECK_THROWS(time_frame(1.5, rx));
    CHECK(lobe_bin_range(16, 8, 256) == std::pair{12, 20});
    CHECK(lobe_bin_range(2, 8, 256) == std::pair{0, 6});
  }

  TEST_CASE("frame count derived from the sample count") {
    const ReceiverParams rx;
    CHECK(rx.samples_per_interval() == 2000000);
    CHECK(rx.frame_count() == (2000000 - 256) / 18000 + 1);
    CHECK(rx.frame_count() == 112);
  }

  TEST_CASE("main-lobe width in hertz") {
    CHECK(main_lobe_width_hz(8, 1000.0, 150) == doctest::Approx(53.333333).epsilon(1e-6));
    CHECK(main_lobe_width_hz(8, 1000.0, 150) < 60.0);
    CHECK(main_lobe_width_hz(8, 1000.0, 42) == doctest::Approx(190.476190).epsilon(1e-6));
    CHECK(main_lobe_width_hz(8, 1000.0, 42) > 60.0);
  }

  TEST_CASE("resolvability report for the reference receiver") {
    const ReceiverParams rx;
    TransmitterTable tx;
    const double freqs[] = {131e3, 201e3, 401e3, 841e3};
    for (int i = 0; i < 4; ++i) {
      tx[i + 1].baseband_freq = freqs[i];
      tx[i + 1].offset = 0.1 * (i + 1);
    }
    const auto report = check_resolvability(tx, rx);
    const auto* res = report.find("resolvability");
    REQUIRE(res != nullptr);
    CHECK(res->bound == 229.0);
    CHECK(res->value == 256.0);
    CHECK(res->passed);
    CHECK(report.all_passed());

    ReceiverParams narrow = rx;
    narrow.window_width = 200;
    CHECK_FALSE(check_resolvability(tx, narrow).find("resolvability")->passed);
    tx[2].baseband_freq = 1.2e6;
    CHECK_FALSE(check_resolvability(tx, rx).find("nyquist")->passed);
  }

  TEST_CASE("pulse placement over an offset grid") {
    // Frames m and m+1 lie inside the pulse except when the pulse starts
    // between a frame start and that frame's end.
    const ReceiverParams rx;
    const TransmitterParams tx;
    const double fs = rx.sample_rate;
    const double pulse_end_offset = tx.pulse_width * fs;
    int inside = 0, total = 0;
    for (double tau = 0.0; tau < 0.98; tau += 0.0005) {
      const int m = time_frame(tau, rx);
      if (m + 1 >= rx.frame_count()) continue;
      ++total;
      const double start = tau * fs;
      const bool ok = m * static_cast<double>(rx.hop) >= start - 1e-6 &&
                      (m + 1.0) * rx.hop + rx.window_width <= start + pulse_end_offset + 1e-6;
      const double phase = std::fmod(start, rx.hop);
      const bool defect = phase > 1e-6 && phase < rx.window_width;
      CHECK(ok == !defect);
      inside += ok;
    }
    CHECK(inside > total * 0.95);
  }

  TEST_CASE("zero input gives zero output") {
    const ReceiverParams rx = test::small_receiver();
    const std::vector<Complex> zeros(static_cast<std::size_t>(rx.samples_per_interval()));
    const Spectrogram s = spectrogram(zeros, rx);
    CHECK(std::all_of(s.mag.begin(), s.mag.end(), [](double v) { return v == 0.0; }));
    SensorSetup setup{rx, {}, 1.0};
    setup.rx.noise_cov = 0.0;
    Rng rng(3);
    const auto y = synth_baseband({}, uav_at(0, 0, 30, 0), 0.0, setup, rng);
    CHECK(y.size() == static_cast<std::size_t>(rx.samples_per_interval()));
    CHECK(std::all_of(y.begin(), y.end(), [](Complex v) { return v == 0.0; }));
  }

  TEST_CASE("noise-free single tone has constant modulus inside the pulse") {
    ReceiverParams rx;
    rx.noise_cov = 0.0;
    rx.antenna.isotropic = true;
    TransmitterParams tx;
    tx.offset = 0.25;
    SensorSetup setup{rx, {{7, tx}}, 1.0};
    ObjectState obj;
    obj.x << 100.0, 0.0, 50.0, 0.0;
    obj.label = 7;
    obj.tau = tx.offset;
    const UavState u = uav_at(0, 0, 30, 0);
    Rng rng(1);
    const auto y = synth_baseband(std::span(&obj, 1), u, 0.0, setup, rng);
    const double gamma = received_magnitude(object_position(obj, 1.0), u, rx, tx);
    const std::int64_t first = std::llround(tx.offset * rx.sample_rate);
    const std::int64_t last = first + std::llround(tx.pulse_width * rx.sample_rate);
    for (std::int64_t n : {first - 1, first, (first + last) / 2, last - 1, last}) {
      const double expect = (n >= first && n < last) ? gamma : 0.0;
      CHECK(std::abs(y[n]) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  TEST_CASE("noise sample power") {
    ReceiverParams rx;
    rx.noise_cov = 0.025 * 0.025;
    SensorSetup setup{rx, {}, 1.0};
    Rng rng(11);
    const auto y = synth_baseband({}, uav_at(0, 0, 30, 0), 0.0, setup, rng);
    double power = 0.0;
    for (auto v : y) power += std::norm(v);
    power /= static_cast<double>(y.size());
    CHECK(y.size() >= 1000000u);
    CHECK(std::abs(power / rx.noise_cov - 1.0) < 0.02);
  }

  TEST_CASE("bin-centred tone under a rectangular window") {
    ReceiverParams rx = test::small_receiver();
    rx.window = WindowKind::Rectangular;
    const int bin = 5;
    const double f = bin * rx.sample_rate / rx.fft_len;
    std::vector<Complex> y(static_cast<std::size_t>(rx.samples_per_interval()));
    const double gamma = 0.3;
    for (std::size_t n = 0; n < y.size(); ++n)
      y[n] = gamma * std::polar(1.0, 2.0 * kPi * f * static_cast<double>(n) / rx.sample_rate);
    const Spectrogram s = spectrogram(y, rx);
    for (int m = 0; m < s.frames; ++m)
      for (int l = 0; l < s.bins; ++l)
        CHECK(s.at(m, l) == doctest::Approx(l == bin ? gamma * rx.window_width : 0.0).epsilon(1e-9));
  }

  TEST_CASE("STFT matches the direct-summation oracle") {
    for (WindowKind kind : {WindowKind::Hamming, WindowKind::BlackmanHarris4}) {
      ReceiverParams rx = test::small_receiver();
      rx.window = kind;
      for (int len : {32, 48}) {
        rx.fft_len = len;
        Rng rng(static_cast<std::uint64_t>(len));
        const auto y = test::random_samples(static_cast<std::size_t>(rx.samples_per_interval()), rng);
        const StftMatrix fast = stft(y, rx, Exec::Serial);
        const StftMatrix slow = direct_stft(y, rx);
        double scale = 0.0, err = 0.0;
        for (std::size_t i = 0; i < slow.values.size(); ++i) {
          scale = std::max(scale, std::abs(slow.values[i]));
          err = std::max(err, std::abs(fast.values[i] - slow.values[i]));
        }
        CHECK(err <= 1e-9 * scale);
      }
    }
  }

  TEST_CASE("STFT is linear") {
    const ReceiverParams rx = test::small_receiver();
    Rng rng(5);
    const std::size_t n = static_cast<std::size_t>(rx.samples_per_interval());
    const auto x = test::random_samples(n, rng);
    const auto y = test::random_samples(n, rng);
    const Complex a(0.7, -1.2), b(-2.0, 0.3);
    std::vector<Complex> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = a * x[i] + b * y[i];
    const auto sx = stft(x, rx), sy = stft(y, rx), sm = stft(mix, rx);
    for (std::size_t i = 0; i < sm.values.size(); ++i) {
      const Complex expect = a * sx.values[i] + b * sy.values[i];
      CHECK(std::abs(sm.values[i] - expect) <= 1e-9 * std::max(1.0, std::abs(expect)));
    }
  }

  TEST_CASE("serial and parallel STFT agree exactly") {
    const ReceiverParams rx;
    Rng rng(8);
    const auto y = test::random_samples(static_cast<std::size_t>(rx.samples_per_interval()), rng);
    const auto a = spectrogram(y, rx, 0, Exec::Serial);
    const auto b = spectrogram(y, rx, 0, Exec::Parallel);
    CHECK(a.mag == b.mag);
    CHECK(a.frames == 112);
    CHECK(a.bins == 256);
  }

  TEST_CASE("observe equals spectrogram of the full synthesized interval without noise") {
    ReceiverParams rx;
    rx.noise_cov = 0.0;
    TransmitterParams tx;
    tx.offset = 0.3;
    SensorSetup setup{rx, {{1, tx}}, 1.0};
    ObjectState obj;
    obj.x << 400.0, 0.0, 300.0, 0.0;
    obj.label = 1;
    obj.tau = tx.offset;
    const UavState u = uav_at(10, 20, 30, 0.5);
    Rng r1(1), r2(1);
    const auto full = spectrogram(synth_baseband(std::span(&obj, 1), u, 4.0, setup, r1), rx);
    const auto fast = observe(std::span(&obj, 1), u, 4.0, setup, r2);
    REQUIRE(full.mag.size() == fast.mag.size());
    for (std::size_t i = 0; i < full.mag.size(); ++i)
      CHECK(fast.mag[i] == doctest::Approx(full.mag[i]).epsilon(1e-9).scale(1e-12));
  }

  TEST_CASE("spectrogram dump round trip") {
    Spectrogram s(3, 4, 17);
    for (std::size_t i = 0; i < s.mag.size(); ++i) s.mag[i] = 0.1 * static_cast<double>(i) + 1e-17;
    const auto path = std::filesystem::temp_directory_path() / "rftbd_spec_roundtrip.bin";
    write_spectrogram(path, s);
    CHECK(std::filesystem::file_size(path) == 16 + 12 * 8);
    const Spectrogram back = read_spectrogram(path);
    CHECK(back.frames == 3);
    CHECK(back.bins == 4);
    CHECK(back.interval == 17);
    CHECK(back.mag == s.mag);
    std::filesystem::remove(path);
  }
}
