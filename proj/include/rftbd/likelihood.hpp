// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Separable track-before-detect likelihood.
//
// An object only affects the bins of its influence region: two frames
// starting at the frame where its pulse begins, times the main-lobe bins
// around its carrier bin. Inside the region a bin magnitude is Rice
// distributed around the expected magnitude |G|; elsewhere it is Rayleigh
// (noise only). The single-object likelihood is the product of Rice/Rayleigh
// ratios over the region, and the multi-object likelihood factorizes over
// objects with disjoint regions.

#pragma once

#include "rftbd/rf_signal.hpp"
#include "rftbd/types.hpp"

#include <map>
#include <span>
#include <vector>

namespace rftbd {

/// Rice density with noncentrality nu and per-component variance sigma2:
/// (z / s2) exp(-(z^2 + nu^2) / (2 s2)) I_0(z nu / s2).
double ricean_pdf(double z, double nu, double sigma2);
double log_ricean_pdf(double z, double nu, double sigma2);
/// Rayleigh density (z / s2) exp(-z^2 / (2 s2)); the nu = 0 Rice density.
double rayleigh_pdf(double z, double sigma2);
double log_rayleigh_pdf(double z, double sigma2);

/// log(ricean_pdf(z, nu, s2) / rayleigh_pdf(z, s2)) = -nu^2/(2 s2) + log I_0(z nu / s2).
double log_likelihood_ratio(double z, double nu, double sigma2);

/// Frames [frame_first, frame_last) x bins [bin_first, bin_last).
struct InfluenceRegion {
  int frame_first = 0;
  int frame_last = 0;
  int bin_first = 0;
  int bin_last = 0;

  [[nodiscard]] bool empty() const { return frame_first >= frame_last || bin_first >= bin_last; }
  [[nodiscard]] bool contains(int m, int l) const {
    return m >= frame_first && m < frame_last && l >= bin_first && l < bin_last;
  }
  [[nodiscard]] bool overlaps(const InfluenceRegion& o) const;
};

/// Measurement model for one sensor configuration. Caches the window and the
/// per-label bin responses; cheap to share across threads (all methods const).
class MeasurementModel {
 public:
  explicit MeasurementModel(SensorSetup setup);

  [[nodiscard]] const SensorSetup& setup() const { return setup_; }
  [[nodiscard]] const Window& window() const { return window_; }
  [[nodiscard]] int frames() const { return frames_; }
  [[nodiscard]] int bins() const { return setup_.rx.fft_len; }
  /// Sigma_z = E_w Sigma_eta / 2.
  [[nodiscard]] double noise_freq_cov() const { return noise_freq_cov_; }

  [[nodiscard]] InfluenceRegion influence_region(Label label, double tau) const;
  [[nodiscard]] InfluenceRegion influence_region(const ObjectState& x) const {
    return influence_region(x.label, x.tau);
  }

  /// |G^(m,l)(x)| = gamma |W(l - L f / f_s)| inside the influence region, 0 outside.
  [[nodiscard]] double expected_bin_magnitude(const ObjectState& x, const UavState& uav, int m,
                                              int l) const;

  /// log g_z(x).
  [[nodiscard]] double log_likelihood(const ObjectState& x, const Spectrogram& z,
                                      const UavState& uav) const;

  /// Sum of log g_z(x) over X. Throws if two influence regions overlap.
  [[nodiscard]] double multi_object_log_likelihood(std::span<const ObjectState> objects,
                                                   const Spectrogram& z,
                                                   const UavState& uav) const;

  /// out[i] = log g_z(particle i with the given label).
  void log_likelihoods(Label label, std::span<const Particle> particles, const Spectrogram& z,
                       const UavState& uav, std::span<double> out,
                       Exec exec = Exec::Parallel) const;

  /// Noise-free measurement: expected magnitudes of all objects, zeros elsewhere.
  [[nodiscard]] Spectrogram ideal_measurement(std::span<const ObjectState> objects,
                                              const UavState& uav,
                                              std::int64_t interval_index = 0) const;

 private:
  struct LabelResponse {
    TransmitterParams tx;
    int bin_first = 0;
    int bin_last = 0;
    std::vector<double> response;  // |W(l - L f / f_s)| for l in [bin_first, bin_last)
  };

  [[nodiscard]] const LabelResponse& response(Label label) const;
  [[nodiscard]] double log_likelihood(const LabelResponse& r, const Particle& p,
                                      const Spectrogram& z, const UavState& uav) const;
  void check_dimensions(const Spectrogram& z) const;

  SensorSetup setup_;
  Window window_;
  int frames_ = 0;
  double noise_freq_cov_ = 0.0;
  std::map<Label, LabelResponse> responses_;
};

}  // namespace rftbd
