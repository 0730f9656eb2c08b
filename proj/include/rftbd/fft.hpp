// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <memory>

namespace rftbd {

/// Forward complex DFT of a fixed length, backed by FFTW.
///
/// Plans are created once per length (plan creation is serialized) and
/// shared; forward() may be called concurrently from any thread.
class Dft {
 public:
  explicit Dft(int n);

  [[nodiscard]] int size() const { return n_; }

  /// out[k] = sum_n in[n] exp(-j 2 pi n k / N). in and out must not alias.
  void forward(const std::complex<double>* in, std::complex<double>* out) const;

 private:
  struct Plan;
  int n_;
  std::shared_ptr<const Plan> plan_;
};

}  // namespace rftbd
