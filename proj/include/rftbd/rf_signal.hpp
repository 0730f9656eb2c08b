// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Received-signal synthesis and time-frequency measurements.
//
// An object with label l emits an on-off keyed tone at baseband frequency
// f(l): a pulse of width Pw at offset tau within every period T0. The UAV
// receives the sum of all pulses, attenuated by distance and antenna gain,
// plus complex white Gaussian noise. Each measurement interval is cut into M
// frames of N_w samples spaced R samples apart; each frame is windowed and
// transformed with an L-point DFT. The measurement is the M x L magnitude
// matrix.

#pragma once

#include "rftbd/rng.hpp"
#include "rftbd/types.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rftbd {

struct TransmitterParams {
  double amplitude = 0.0059;     // volts at the reference distance
  double baseband_freq = 131e3;  // Hz
  double phase = 0.0;            // radians
  double pulse_period = 1.0;     // seconds
  double pulse_width = 0.018;    // seconds
  double offset = 0.0;           // seconds in [0, pulse_period)

  void validate() const;
};

using TransmitterTable = std::map<Label, TransmitterParams>;

enum class WindowKind { Rectangular, Hamming, Blackman, BlackmanHarris4 };

std::string_view to_string(WindowKind k);
WindowKind parse_window_kind(std::string_view s);

struct Window {
  std::vector<double> coefficients;
  int main_lobe_bins = 0;  // N_m
  double energy = 0.0;     // sum of w[n]^2
  double coherent_gain = 0.0;  // sum of w[n], i.e. |W[0]|
};

/// Periodic (DFT-even) window of the given width.
Window window_coefficients(WindowKind kind, int width);

/// |W(delta)| for a fractional bin offset delta, with
/// W(delta) = sum_n w[n] exp(-j 2 pi n delta / L).
double window_response(const Window& w, double offset_bins, int fft_len);

/// How the path-loss exponent applies to the received amplitude.
/// Amplitude: gamma ~ (d0/d)^kappa. Power: gamma ~ (d0/d)^(kappa/2), i.e.
/// kappa is the exponent of received power as in RSSI models.
enum class PathLossLaw { Amplitude, Power };

std::string_view to_string(PathLossLaw p);
PathLossLaw parse_path_loss_law(std::string_view s);

/// Directional antenna: G(b) = G_max (g_back + (1 - g_back) ((1 + cos b) / 2)^n)
/// with b the angle between boresight (the UAV heading) and the line of sight.
struct AntennaPattern {
  bool isotropic = false;
  double gain_max = 1.7782794100389228;  // 5 dB
  double back_ratio = 0.1;
  double exponent = 2.0;

  void validate() const;
};

struct ReceiverParams {
  double center_freq = 150e6;  // Hz
  double sample_rate = 2e6;    // Hz
  double gain = 3981.0717055349733;  // linear amplitude gain (72 dB)
  double ref_distance = 1.0;   // m
  double path_loss = 3.1068;   // kappa
  PathLossLaw path_loss_law = PathLossLaw::Amplitude;
  double noise_cov = 0.025 * 0.025;  // Sigma_eta, V^2
  WindowKind window = WindowKind::BlackmanHarris4;
  int window_width = 256;  // N_w
  int fft_len = 256;       // L
  int hop = 18000;         // R
  int frames = 0;          // M; 0 derives it from the sample count
  double interval = 1.0;   // measurement interval length (= T0), seconds
  AntennaPattern antenna;

  void validate() const;
  /// ceil(interval * f_s).
  [[nodiscard]] std::int64_t samples_per_interval() const;
  /// Largest M such that every frame has N_w samples inside the interval.
  [[nodiscard]] int derived_frame_count() const;
  /// Configured M if set, otherwise derived_frame_count().
  [[nodiscard]] int frame_count() const;
  /// Effective exponent applied to (d0 / d).
  [[nodiscard]] double amplitude_exponent() const;
};

double db_to_amplitude(double db);

/// M x L magnitudes, row-major (frame-major).
struct Spectrogram {
  int frames = 0;
  int bins = 0;
  std::int64_t interval = 0;
  std::vector<double> mag;

  Spectrogram() = default;
  Spectrogram(int m, int l, std::int64_t k = 0)
      : frames(m), bins(l), interval(k), mag(static_cast<std::size_t>(m) * l, 0.0) {}

  double& at(int m, int l) { return mag[static_cast<std::size_t>(m) * bins + l]; }
  [[nodiscard]] double at(int m, int l) const {
    return mag[static_cast<std::size_t>(m) * bins + l];
  }
};

/// M x L complex STFT, row-major.
struct StftMatrix {
  int frames = 0;
  int bins = 0;
  std::vector<std::complex<double>> values;

  std::complex<double>& at(int m, int l) { return values[static_cast<std::size_t>(m) * bins + l]; }
  [[nodiscard]] const std::complex<double>& at(int m, int l) const {
    return values[static_cast<std::size_t>(m) * bins + l];
  }
};

Eigen::Vector3d object_position(const ObjectState& s, double height);

double antenna_gain(const Eigen::Vector3d& object_pos, const UavState& uav,
                    const AntennaPattern& pattern);

/// gamma = A G_r G_a (d0 / d)^kappa_eff. Throws for d < d0.
double received_magnitude(const Eigen::Vector3d& object_pos, const UavState& uav,
                          const ReceiverParams& rx, const TransmitterParams& tx);

/// psi = phi - (f_c + f) d / c.
double received_phase(const Eigen::Vector3d& object_pos, const UavState& uav,
                      const ReceiverParams& rx, const TransmitterParams& tx);

/// Everything needed to turn a multi-object state into a measurement.
struct SensorSetup {
  ReceiverParams rx;
  TransmitterTable tx;
  double object_height = 1.0;  // m, common to all objects

  [[nodiscard]] const TransmitterParams& transmitter(Label l) const;
};

/// Noisy baseband samples over [t_start, t_start + T0): one entry per sample,
/// ceil(T0 f_s) in total.
std::vector<std::complex<double>> synth_baseband(std::span<const ObjectState> objects,
                                                 const UavState& uav, double t_start,
                                                 const SensorSetup& setup, Rng& rng);

/// Noise-free contribution of the objects at sample n of the interval.
std::complex<double> baseband_signal_at(std::span<const ObjectState> objects, const UavState& uav,
                                        double t_start, std::int64_t n, const SensorSetup& setup);

/// Windowed L-point DFT of every frame.
StftMatrix stft(std::span<const std::complex<double>> samples, const ReceiverParams& rx,
                Exec exec = Exec::Parallel);

/// Elementwise modulus of stft().
Spectrogram spectrogram(std::span<const std::complex<double>> samples, const ReceiverParams& rx,
                        std::int64_t interval_index = 0, Exec exec = Exec::Parallel);

/// Same measurement as spectrogram(synth_baseband(...)) but only synthesizes
/// the samples covered by STFT frames. Used by the simulation loop.
Spectrogram observe(std::span<const ObjectState> objects, const UavState& uav, double t_start,
                    const SensorSetup& setup, Rng& rng, std::int64_t interval_index = 0);

/// floor(L f / f_s).
int freq_bin(double freq, const ReceiverParams& rx);
/// ceil(tau f_s / R).
int time_frame(double tau, const ReceiverParams& rx);

/// Half-open bin range [first, last) of width N_m centered on center_bin,
/// clipped to [0, L).
std::pair<int, int> lobe_bin_range(int center_bin, int main_lobe_bins, int fft_len);

/// Main-lobe width in Hz, N_m f_s / N_w.
double main_lobe_width_hz(int main_lobe_bins, double sample_rate, int window_width);

struct ResolvabilityCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;  // measured quantity
  double bound = 0.0;  // limit it is compared against
  std::string detail;
};

struct ResolvabilityReport {
  std::vector<ResolvabilityCheck> checks;

  [[nodiscard]] bool all_passed() const;
  [[nodiscard]] const ResolvabilityCheck* find(std::string_view name) const;
};

ResolvabilityReport check_resolvability(const TransmitterTable& tx, const ReceiverParams& rx);

// Spectrogram dump: "SPEC", u32 M, u32 L, u32 interval, then M*L little-endian
// f64 values in row-major order.
void write_spectrogram(const std::filesystem::path& path, const Spectrogram& s);
Spectrogram read_spectrogram(const std::filesystem::path& path);
void write_spectrogram_csv(const std::filesystem::path& path, const Spectrogram& s);

}  // namespace rftbd
