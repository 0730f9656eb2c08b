// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/likelihood.hpp"

#include "rftbd/bessel.hpp"

#include <cmath>

namespace rftbd {

namespace {

void check_density_args(double z, double nu, double sigma2) {
  if (!std::isfinite(z) || !std::isfinite(nu) || !std::isfinite(sigma2))
    throw InvalidArgument("density: non-finite argument");
  if (z < 0.0 || nu < 0.0 || sigma2 <= 0.0)
    throw InvalidArgument("density: need z >= 0, nu >= 0, sigma2 > 0");
}

}  // namespace

double log_ricean_pdf(double z, double nu, double sigma2) {
  check_density_args(z, nu, sigma2);
  if (z == 0.0) return -INFINITY;
  return std::log(z / sigma2) - (z * z + nu * nu) / (2.0 * sigma2) + log_i0(z * nu / sigma2);
}

double ricean_pdf(double z, double nu, double sigma2) {
  return std::exp(log_ricean_pdf(z, nu, sigma2));
}

double log_rayleigh_pdf(double z, double sigma2) {
  check_density_args(z, 0.0, sigma2);
  if (z == 0.0) return -INFINITY;
  return std::log(z / sigma2) - z * z / (2.0 * sigma2);
}

double rayleigh_pdf(double z, double sigma2) { return std::exp(log_rayleigh_pdf(z, sigma2)); }

double log_likelihood_ratio(double z, double nu, double sigma2) {
  const double base = -nu * nu / (2.0 * sigma2);
  if (z == 0.0 || nu == 0.0) return base;
  return base + log_i0(z * nu / sigma2);
}

bool InfluenceRegion::overlaps(const InfluenceRegion& o) const {
  if (empty() || o.empty()) return false;
  return frame_first < o.frame_last && o.frame_first < frame_last && bin_first < o.bin_last &&
         o.bin_first < bin_last;
}

MeasurementModel::MeasurementModel(SensorSetup setup) : setup_(std::move(setup)) {
  const auto& rx = setup_.rx;
  rx.validate();
  window_ = window_coefficients(rx.window, rx.window_width);
  frames_ = rx.frame_count();
  noise_freq_cov_ = window_.energy * rx.noise_cov / 2.0;
  for (const auto& [label, tx] : setup_.tx) {
    tx.validate();
    LabelResponse r;
    r.tx = tx;
    const double f = tx.baseband_freq;
    if (f >= 0.0 && f < rx.sample_rate) {
      const auto [b0, b1] = lobe_bin_range(freq_bin(f, rx), window_.main_lobe_bins, rx.fft_len);
      r.bin_first = b0;
      r.bin_last = b1;
      const double exact = rx.fft_len * f / rx.sample_rate;
      for (int l = b0; l < b1; ++l)
        r.response.push_back(window_response(window_, l - exact, rx.fft_len));
    }
    responses_.emplace(label, std::move(r));
  }
}

const MeasurementModel::LabelResponse& MeasurementModel::response(Label label) const {
  auto it = responses_.find(label);
  if (it == responses_.end()) throw InvalidArgument("no transmitter for label " + std::to_string(label));
  return it->second;
}

InfluenceRegion MeasurementModel::influence_region(Label label, double tau) const {
  const auto& r = response(label);
  InfluenceRegion reg;
  reg.bin_first = r.bin_first;
  reg.bin_last = r.bin_last;
  const int m = time_frame(tau, setup_.rx);
  reg.frame_first = std::min(m, frames_);
  reg.frame_last = std::min(m + 2, frames_);
  return reg;
}

double MeasurementModel::expected_bin_magnitude(const ObjectState& x, const UavState& uav, int m,
                                                int l) const {
  const auto& r = response(x.label);
  const InfluenceRegion reg = influence_region(x);
  if (!reg.contains(m, l)) return 0.0;
  const double gamma =
      received_magnitude(object_position(x, setup_.object_height), uav, setup_.rx, r.tx);
  return gamma * r.response[l - r.bin_first];
}

void MeasurementModel::check_dimensions(const Spectrogram& z) const {
  if (z.frames != frames_ || z.bins != setup_.rx.fft_len)
    throw InvalidArgument("spectrogram dimensions do not match the receiver");
  if (!(noise_freq_cov_ > 0.0)) throw InvalidArgument("likelihood requires positive noise covariance");
}

double MeasurementModel::log_likelihood(const LabelResponse& r, const Particle& p,
                                        const Spectrogram& z, const UavState& uav) const {
  if (r.bin_first >= r.bin_last) return 0.0;
  const int m0 = time_frame(p.tau, setup_.rx);
  const int m1 = std::min(m0 + 2, frames_);
  if (m0 >= m1) return 0.0;
  const Eigen::Vector3d pos{p.x[0], p.x[2], setup_.object_height};
  const double gamma = received_magnitude(pos, uav, setup_.rx, r.tx);
  const double s2 = noise_freq_cov_;
  double acc = 0.0;
  for (int m = m0; m < m1; ++m) {
    const double* row = &z.mag[static_cast<std::size_t>(m) * z.bins];
    for (int l = r.bin_first; l < r.bin_last; ++l)
      acc += log_likelihood_ratio(row[l], gamma * r.response[l - r.bin_first], s2);
  }
  return acc;
}

double MeasurementModel::log_likelihood(const ObjectState& x, const Spectrogram& z,
                                        const UavState& uav) const {
  check_dimensions(z);
  return log_likelihood(response(x.label), x.particle(), z, uav);
}

double MeasurementModel::multi_object_log_likelihood(std::span<const ObjectState> objects,
                                                     const Spectrogram& z,
                                                     const UavState& uav) const {
  check_dimensions(z);
  std::vector<InfluenceRegion> regions;
  regions.reserve(objects.size());
  for (const auto& x : objects) {
    const InfluenceRegion reg = influence_region(x);
    for (const auto& other : regions)
      if (reg.overlaps(other))
        throw InvalidArgument("influence regions overlap; the likelihood is not separable");
    regions.push_back(reg);
  }
  double acc = 0.0;
  for (const auto& x : objects) acc += log_likelihood(response(x.label), x.particle(), z, uav);
  return acc;
}

void MeasurementModel::log_likelihoods(Label label, std::span<const Particle> particles,
                                       const Spectrogram& z, const UavState& uav,
                                       std::span<double> out, Exec exec) const {
  check_dimensions(z);
  if (out.size() != particles.size())
    throw InvalidArgument("log_likelihoods: output size mismatch");
  const auto& r = response(label);
  const auto n = static_cast<std::ptrdiff_t>(particles.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = log_likelihood(r, particles[i], z, uav);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = log_likelihood(r, particles[i], z, uav);
}

Spectrogram MeasurementModel::ideal_measurement(std::span<const ObjectState> objects,
                                                const UavState& uav,
                                                std::int64_t interval_index) const {
  Spectrogram s(frames_, setup_.rx.fft_len, interval_index);
  for (const auto& x : objects) {
    const auto& r = response(x.label);
    const InfluenceRegion reg = influence_region(x);
    if (reg.empty()) continue;
    const double gamma =
        received_magnitude(object_position(x, setup_.object_height), uav, setup_.rx, r.tx);
    for (int m = reg.frame_first; m < reg.frame_last; ++m)
      for (int l = reg.bin_first; l < reg.bin_last; ++l)
        s.at(m, l) += gamma * r.response[l - r.bin_first];
  }
  return s;
}

}  // namespace rftbd
