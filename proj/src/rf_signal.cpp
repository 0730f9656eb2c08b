// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/rf_signal.hpp"

#include "rftbd/fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace rftbd {

namespace {

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

double frac(double x) { return x - std::floor(x); }

// Per-object quantities that stay fixed over one measurement interval.
struct Emitter {
  double magnitude = 0.0;
  double phase = 0.0;
  double cycles_per_sample = 0.0;  // f / f_s
  double offset_samples = 0.0;     // tau f_s
  double period_samples = 0.0;     // T0 f_s
  double width_samples = 0.0;      // Pw f_s
};

std::vector<Emitter> prepare_emitters(std::span<const ObjectState> objects, const UavState& uav,
                                      const SensorSetup& setup) {
  std::vector<Emitter> out;
  out.reserve(objects.size());
  const double fs = setup.rx.sample_rate;
  for (const auto& obj : objects) {
    const auto& tx = setup.transmitter(obj.label);
    const Eigen::Vector3d pos = object_position(obj, setup.object_height);
    Emitter e;
    e.magnitude = received_magnitude(pos, uav, setup.rx, tx);
    e.phase = received_phase(pos, uav, setup.rx, tx);
    e.cycles_per_sample = tx.baseband_freq / fs;
    e.offset_samples = obj.tau * fs;
    e.period_samples = tx.pulse_period * fs;
    e.width_samples = tx.pulse_width * fs;
    out.push_back(e);
  }
  return out;
}

std::complex<double> emitter_sum(std::span<const Emitter> emitters, std::int64_t n) {
  std::complex<double> acc{0.0, 0.0};
  const auto nd = static_cast<double>(n);
  for (const auto& e : emitters) {
    double d = nd - e.offset_samples;
    d -= std::floor(d / e.period_samples) * e.period_samples;
    if (d >= e.width_samples) continue;
    const double arg = e.phase + 2.0 * kPi * frac(e.cycles_per_sample * nd);
    acc += std::polar(e.magnitude, arg);
  }
  return acc;
}

// exp(-j 2 pi k / L) for k in [0, L).
std::vector<std::complex<double>> twiddles(int fft_len) {
  std::vector<std::complex<double>> t(fft_len);
  for (int k = 0; k < fft_len; ++k) t[k] = std::polar(1.0, -2.0 * kPi * k / fft_len);
  return t;
}

// STFT of one frame given its N_w raw samples.
void transform_frame(const std::complex<double>* frame, std::int64_t frame_start,
                     std::span<const double> window, const Dft& dft,
                     std::span<const std::complex<double>> twiddle, std::complex<double>* folded,
                     std::complex<double>* out) {
  const int fft_len = dft.size();
  std::fill(folded, folded + fft_len, std::complex<double>{});
  for (std::size_t n = 0; n < window.size(); ++n) folded[n % fft_len] += frame[n] * window[n];
  dft.forward(folded, out);
  const std::int64_t shift = frame_start % fft_len;
  for (int l = 0; l < fft_len; ++l) out[l] *= twiddle[(shift * l) % fft_len];
}

template <typename FrameSource>
void stft_frames(int frames, const ReceiverParams& rx, FrameSource&& source, StftMatrix& out,
                 Exec exec) {
  const Window w = window_coefficients(rx.window, rx.window_width);
  const Dft dft(rx.fft_len);
  const auto twiddle = twiddles(rx.fft_len);
  out.frames = frames;
  out.bins = rx.fft_len;
  out.values.assign(static_cast<std::size_t>(frames) * rx.fft_len, {});
  auto body = [&](int m, std::vector<std::complex<double>>& frame,
                  std::vector<std::complex<double>>& folded) {
    const std::int64_t start = static_cast<std::int64_t>(m) * rx.hop;
    const std::complex<double>* p = source(m, start, frame);
    transform_frame(p, start, w.coefficients, dft, twiddle, folded.data(), &out.at(m, 0));
  };
  if (exec == Exec::Serial) {
    std::vector<std::complex<double>> frame(rx.window_width), folded(rx.fft_len);
    for (int m = 0; m < frames; ++m) body(m, frame, folded);
    return;
  }
#pragma omp parallel
  {
    std::vector<std::complex<double>> frame(rx.window_width), folded(rx.fft_len);
#pragma omp for schedule(static)
    for (int m = 0; m < frames; ++m) body(m, frame, folded);
  }
}

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_le(std::istream& is, int bytes) {
  unsigned char b[8] = {};
  is.read(reinterpret_cast<char*>(b), bytes);
  if (!is) throw InvalidArgument("read_spectrogram: truncated file");
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

void TransmitterParams::validate() const {
  if (!finite_all({amplitude, baseband_freq, phase, pulse_period, pulse_width, offset}))
    throw InvalidArgument("transmitter: non-finite parameter");
  if (amplitude <= 0.0) throw InvalidArgument("transmitter: amplitude must be positive");
  if (baseband_freq < 0.0) throw InvalidArgument("transmitter: negative baseband frequency");
  if (!(pulse_width > 0.0 && pulse_width < pulse_period))
    throw InvalidArgument("transmitter: need 0 < pulse_width < pulse_period");
  if (!(offset >= 0.0 && offset < pulse_period))
    throw InvalidArgument("transmitter: offset outside [0, pulse_period)");
}

std::string_view to_string(WindowKind k) {
  switch (k) {
    case WindowKind::Rectangular: return "rectangular";
    case WindowKind::Hamming: return "hamming";
    case WindowKind::Blackman: return "blackman";
    case WindowKind::BlackmanHarris4: return "blackman_harris4";
  }
  return "unknown";
}

WindowKind parse_window_kind(std::string_view s) {
  for (auto k : {WindowKind::Rectangular, WindowKind::Hamming, WindowKind::Blackman,
                 WindowKind::BlackmanHarris4})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unsupported window kind: " + std::string(s));
}

Window window_coefficients(WindowKind kind, int width) {
  if (width < 2) throw InvalidArgument("window_coefficients: width must be >= 2");
  std::array<double, 4> a{};
  int lobe = 0;
  switch (kind) {
    case WindowKind::Rectangular: a = {1.0, 0.0, 0.0, 0.0}; lobe = 2; break;
    case WindowKind::Hamming: a = {0.54, 0.46, 0.0, 0.0}; lobe = 4; break;
    case WindowKind::Blackman: a = {0.42, 0.5, 0.08, 0.0}; lobe = 6; break;
    case WindowKind::BlackmanHarris4: a = {0.35875, 0.48829, 0.14128, 0.01168}; lobe = 8; break;
    default: throw InvalidArgument("window_coefficients: unsupported kind");
  }
  Window w;
  w.main_lobe_bins = lobe;
  w.coefficients.resize(width);
  for (int n = 0; n < width; ++n) {
    const double x = 2.0 * kPi * n / width;
    w.coefficients[n] = a[0] - a[1] * std::cos(x) + a[2] * std::cos(2 * x) - a[3] * std::cos(3 * x);
  }
  for (double c : w.coefficients) {
    w.energy += c * c;
    w.coherent_gain += c;
  }
  return w;
}

double window_response(const Window& w, double offset_bins, int fft_len) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t n = 0; n < w.coefficients.size(); ++n)
    acc += w.coefficients[n] * std::polar(1.0, -2.0 * kPi * static_cast<double>(n) * offset_bins /
                                                    fft_len);
  return std::abs(acc);
}

std::string_view to_string(PathLossLaw p) {
  return p == PathLossLaw::Amplitude ? "amplitude" : "power";
}

PathLossLaw parse_path_loss_law(std::string_view s) {
  if (s == "amplitude") return PathLossLaw::Amplitude;
  if (s == "power") return PathLossLaw::Power;
  throw InvalidArgument("unknown path loss law: " + std::string(s));
}

void AntennaPattern::validate() const {
  if (isotropic) return;
  if (!finite_all({gain_max, back_ratio, exponent}) || gain_max <= 0.0)
    throw InvalidArgument("antenna: gain_max must be positive");
  if (!(back_ratio > 0.0 && back_ratio <= 1.0))
    throw InvalidArgument("antenna: back_ratio must lie in (0, 1]");
  if (exponent < 0.0) throw InvalidArgument("antenna: exponent must be non-negative");
}

void ReceiverParams::validate() const {
  if (!finite_all({center_freq, sample_rate, gain, ref_distance, path_loss, noise_cov, interval}))
    throw InvalidArgument("receiver: non-finite parameter");
  if (sample_rate <= 0.0) throw InvalidArgument("receiver: sample_rate must be positive");
  if (gain <= 0.0) throw InvalidArgument("receiver: gain must be positive");
  if (ref_distance <= 0.0) throw InvalidArgument("receiver: ref_distance must be positive");
  if (path_loss < 2.0 || path_loss > 4.0)
    throw InvalidArgument("receiver: path_loss exponent must lie in [2, 4]");
  if (noise_cov < 0.0) throw InvalidArgument("receiver: noise_cov must be non-negative");
  if (window_width < 2) throw InvalidArgument("receiver: window_width must be >= 2");
  if (fft_len < 1 || hop < 1) throw InvalidArgument("receiver: fft_len and hop must be positive");
  if (interval <= 0.0) throw InvalidArgument("receiver: interval must be positive");
  if (frames < 0) throw InvalidArgument("receiver: frames must be non-negative");
  if (samples_per_interval() < window_width)
    throw InvalidArgument("receiver: interval shorter than one window");
  const std::int64_t needed = static_cast<std::int64_t>(frame_count() - 1) * hop + window_width;
  if (needed > samples_per_interval())
    throw InvalidArgument("receiver: frames exceed the samples of one interval");
  antenna.validate();
}

std::int64_t ReceiverParams::samples_per_interval() const {
  return static_cast<std::int64_t>(std::ceil(interval * sample_rate - 1e-9));
}

int ReceiverParams::derived_frame_count() const {
  const std::int64_t n = samples_per_interval();
  if (n < window_width) return 0;
  return static_cast<int>((n - window_width) / hop + 1);
}

int ReceiverParams::frame_count() const { return frames > 0 ? frames : derived_frame_count(); }

double ReceiverParams::amplitude_exponent() const {
  return path_loss_law == PathLossLaw::Amplitude ? path_loss : 0.5 * path_loss;
}

double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

Eigen::Vector3d object_position(const ObjectState& s, double height) {
  return {s.x[0], s.x[2], height};
}

double antenna_gain(const Eigen::Vector3d& object_pos, const UavState& uav,
                    const AntennaPattern& pattern) {
  const Eigen::Vector3d los = object_pos - uav.position;
  const double dist = los.norm();
  if (!(dist > 0.0)) throw InvalidArgument("antenna_gain: object and UAV positions coincide");
  if (pattern.isotropic) return 1.0;
  const Eigen::Vector3d boresight{std::cos(uav.heading), std::sin(uav.heading), 0.0};
  const double c = std::clamp(boresight.dot(los) / dist, -1.0, 1.0);
  return pattern.gain_max *
         (pattern.back_ratio +
          (1.0 - pattern.back_ratio) * std::pow(0.5 * (1.0 + c), pattern.exponent));
}

double received_magnitude(const Eigen::Vector3d& object_pos, const UavState& uav,
                          const ReceiverParams& rx, const TransmitterParams& tx) {
  const double d = (object_pos - uav.position).norm();
  if (!std::isfinite(d)) throw InvalidArgument("received_magnitude: non-finite geometry");
  if (d < rx.ref_distance)
    throw InvalidArgument("received_magnitude: object inside the reference distance");
  return tx.amplitude * rx.gain * antenna_gain(object_pos, uav, rx.antenna) *
         std::pow(rx.ref_distance / d, rx.amplitude_exponent());
}

double received_phase(const Eigen::Vector3d& object_pos, const UavState& uav,
                      const ReceiverParams& rx, const TransmitterParams& tx) {
  const double d = (object_pos - uav.position).norm();
  return tx.phase - (rx.center_freq + tx.baseband_freq) * d / kSpeedOfLight;
}

const TransmitterParams& SensorSetup::transmitter(Label l) const {
  auto it = tx.find(l);
  if (it == tx.end()) throw InvalidArgument("no transmitter for label " + std::to_string(l));
  return it->second;
}

std::vector<std::complex<double>> synth_baseband(std::span<const ObjectState> objects,
                                                 const UavState& uav, double t_start,
                                                 const SensorSetup& setup, Rng& rng) {
  if (!std::isfinite(t_start)) throw InvalidArgument("synth_baseband: non-finite start time");
  const std::int64_t n_samples = setup.rx.samples_per_interval();
  if (n_samples <= 0) throw InvalidArgument("synth_baseband: empty interval");
  const auto emitters = prepare_emitters(objects, uav, setup);
  std::vector<std::complex<double>> y(static_cast<std::size_t>(n_samples));
  const double sd = std::sqrt(0.5 * setup.rx.noise_cov);
  for (std::int64_t n = 0; n < n_samples; ++n) {
    y[n] = emitter_sum(emitters, n);
    if (sd > 0.0) {
      const double re = rng.normal();
      const double im = rng.normal();
      y[n] += std::complex<double>{sd * re, sd * im};
    }
  }
  return y;
}

std::complex<double> baseband_signal_at(std::span<const ObjectState> objects, const UavState& uav,
                                        double /*t_start*/, std::int64_t n,
                                        const SensorSetup& setup) {
  const auto emitters = prepare_emitters(objects, uav, setup);
  return emitter_sum(emitters, n);
}

StftMatrix stft(std::span<const std::complex<double>> samples, const ReceiverParams& rx,
                Exec exec) {
  const int frames = rx.frame_count();
  if (frames < 1) throw InvalidArgument("stft: no complete frame");
  const std::int64_t needed = static_cast<std::int64_t>(frames - 1) * rx.hop + rx.window_width;
  if (static_cast<std::int64_t>(samples.size()) < needed)
    throw InvalidArgument("stft: sample count does not cover all frames");
  StftMatrix out;
  stft_frames(
      frames, rx,
      [&](int, std::int64_t start, std::vector<std::complex<double>>&) {
        return samples.data() + start;
      },
      out, exec);
  return out;
}

Spectrogram spectrogram(std::span<const std::complex<double>> samples, const ReceiverParams& rx,
                        std::int64_t interval_index, Exec exec) {
  const StftMatrix y = stft(samples, rx, exec);
  Spectrogram s(y.frames, y.bins, interval_index);
  for (std::size_t i = 0; i < y.values.size(); ++i) s.mag[i] = std::abs(y.values[i]);
  return s;
}

Spectrogram observe(std::span<const ObjectState> objects, const UavState& uav, double t_start,
                    const SensorSetup& setup, Rng& rng, std::int64_t interval_index) {
  if (!std::isfinite(t_start)) throw InvalidArgument("observe: non-finite start time");
  const auto& rx = setup.rx;
  const int frames = rx.frame_count();
  if (frames < 1) throw InvalidArgument("observe: no complete frame");
  const auto emitters = prepare_emitters(objects, uav, setup);
  const double sd = std::sqrt(0.5 * rx.noise_cov);
  // Each frame draws its noise from its own child stream so the result does
  // not depend on the order frames are filled in.
  const Rng noise_root = rng.split(rng());
  StftMatrix y;
  stft_frames(
      frames, rx,
      [&](int m, std::int64_t start, std::vector<std::complex<double>>& frame) {
        Rng frame_rng = noise_root.split(static_cast<std::uint64_t>(m));
        for (int n = 0; n < rx.window_width; ++n) {
          frame[n] = emitter_sum(emitters, start + n);
          if (sd > 0.0) {
            const double re = frame_rng.normal();
            const double im = frame_rng.normal();
            frame[n] += std::complex<double>{sd * re, sd * im};
          }
        }
        return static_cast<const std::complex<double>*>(frame.data());
      },
      y, Exec::Parallel);
  Spectrogram s(y.frames, y.bins, interval_index);
  for (std::size_t i = 0; i < y.values.size(); ++i) s.mag[i] = std::abs(y.values[i]);
  return s;
}

int freq_bin(double freq, const ReceiverParams& rx) {
  if (!(freq >= 0.0 && freq < rx.sample_rate))
    throw InvalidArgument("freq_bin: frequency outside [0, f_s)");
  return static_cast<int>(std::floor(rx.fft_len * freq / rx.sample_rate));
}

int time_frame(double tau, const ReceiverParams& rx) {
  if (!(tau >= 0.0 && tau < rx.interval))
    throw InvalidArgument("time_frame: offset outside [0, T0)");
  const double x = tau * rx.sample_rate / rx.hop;
  const double r = std::round(x);
  // Offsets that land on a hop boundary up to rounding error count as exact.
  if (std::abs(x - r) < 1e-9) return static_cast<int>(r);
  return static_cast<int>(std::ceil(x));
}

std::pair<int, int> lobe_bin_range(int center_bin, int main_lobe_bins, int fft_len) {
  const int first = std::max(0, center_bin - main_lobe_bins / 2);
  const int last = std::min(fft_len, center_bin - main_lobe_bins / 2 + main_lobe_bins);
  return {first, std::max(first, last)};
}

double main_lobe_width_hz(int main_lobe_bins, double sample_rate, int window_width) {
  if (window_width <= 0) throw InvalidArgument("main_lobe_width_hz: window_width must be positive");
  return main_lobe_bins * sample_rate / window_width;
}

bool ResolvabilityReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ResolvabilityCheck* ResolvabilityReport::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ResolvabilityReport check_resolvability(const TransmitterTable& tx, const ReceiverParams& rx) {
  ResolvabilityReport rep;
  auto add = [&](std::string name, bool ok, double value, double bound, std::string detail) {
    rep.checks.push_back({std::move(name), ok, value, bound, std::move(detail)});
  };
  auto fmt = [](const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return std::string(buf);
  };
  if (tx.empty()) {
    add("transmitters", false, 0.0, 1.0, "no transmitters configured");
    return rep;
  }
  const int lobe = window_coefficients(rx.window, rx.window_width).main_lobe_bins;

  double f_max = 0.0, f_min = rx.sample_rate, pw_min = tx.begin()->second.pulse_width;
  std::vector<double> freqs;
  for (const auto& [label, t] : tx) {
    f_max = std::max(f_max, t.baseband_freq);
    f_min = std::min(f_min, t.baseband_freq);
    pw_min = std::min(pw_min, t.pulse_width);
    freqs.push_back(t.baseband_freq);
  }
  std::sort(freqs.begin(), freqs.end());

  add("nyquist", rx.sample_rate > 2.0 * f_max, rx.sample_rate, 2.0 * f_max,
      fmt("f_s = %g Hz, 2 max f = %g Hz", rx.sample_rate, 2.0 * f_max));

  add("window_below_hop", rx.window_width < rx.hop, rx.window_width, rx.hop,
      fmt("N_w = %d, R = %d", rx.window_width, rx.hop));

  const double hop_bound = pw_min * rx.sample_rate / 2.0;
  add("hop_fits_pulse", rx.hop <= hop_bound + 1e-9, rx.hop, hop_bound,
      fmt("R = %d, Pw f_s / 2 = %g", rx.hop, hop_bound));

  const double cycle_bound = f_min > 0.0 ? rx.sample_rate / f_min : INFINITY;
  add("carrier_cycle", rx.window_width >= cycle_bound, rx.window_width, cycle_bound,
      fmt("N_w = %d, f_s / min f = %g", rx.window_width, cycle_bound));

  if (freqs.size() >= 2) {
    double df = INFINITY;
    for (std::size_t i = 1; i < freqs.size(); ++i) df = std::min(df, freqs[i] - freqs[i - 1]);
    const double required = df > 0.0 ? std::ceil(lobe * rx.sample_rate / df) : INFINITY;
    const double width = main_lobe_width_hz(lobe, rx.sample_rate, rx.window_width);
    add("resolvability", rx.window_width >= required, rx.window_width, required,
        fmt("main-lobe width %.2f Hz vs min spacing %.2f Hz", width, df));

    std::set<int> used;
    bool disjoint = true;
    for (double f : freqs) {
      if (f >= rx.sample_rate) continue;
      const auto [b0, b1] = lobe_bin_range(freq_bin(f, rx), lobe, rx.fft_len);
      for (int b = b0; b < b1; ++b) disjoint = used.insert(b).second && disjoint;
    }
    add("distinct_bins", disjoint, disjoint ? 0.0 : 1.0, 0.0,
        disjoint ? "influence bin sets are disjoint" : "influence bin sets overlap");
  }

  bool periods_ok = true;
  for (const auto& [label, t] : tx)
    periods_ok = periods_ok && std::abs(t.pulse_period - rx.interval) <= 1e-12 * rx.interval;
  add("period_matches_interval", periods_ok, periods_ok ? 0.0 : 1.0, 0.0,
      periods_ok ? "pulse period equals the measurement interval"
                 : "a pulse period differs from the measurement interval");

  const int m = rx.frame_count();
  add("frames", m >= 2, m, 2.0, fmt("M = %d frames per interval", m));
  return rep;
}

void write_spectrogram(const std::filesystem::path& path, const Spectrogram& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("write_spectrogram: cannot open " + path.string());
  os.write("SPEC", 4);
  put_u32(os, static_cast<std::uint32_t>(s.frames));
  put_u32(os, static_cast<std::uint32_t>(s.bins));
  put_u32(os, static_cast<std::uint32_t>(s.interval));
  for (double v : s.mag) put_f64(os, v);
  if (!os) throw InvalidArgument("write_spectrogram: write failed for " + path.string());
}

Spectrogram read_spectrogram(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("read_spectrogram: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SPEC", 4) != 0)
    throw InvalidArgument("read_spectrogram: bad magic");
  const auto m = static_cast<int>(get_le(is, 4));
  const auto l = static_cast<int>(get_le(is, 4));
  const auto k = static_cast<std::int64_t>(get_le(is, 4));
  Spectrogram s(m, l, k);
  for (double& v : s.mag) v = std::bit_cast<double>(get_le(is, 8));
  return s;
}

void write_spectrogram_csv(const std::filesystem::path& path, const Spectrogram& s) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("write_spectrogram_csv: cannot open " + path.string());
  char buf[32];
  for (int m = 0; m < s.frames; ++m) {
    for (int l = 0; l < s.bins; ++l) {
      std::snprintf(buf, sizeof buf, "%.17g", s.at(m, l));
      if (l > 0) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace rftbd
