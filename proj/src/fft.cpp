// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rftbd/fft.hpp"

#include "rftbd/types.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace rftbd {

struct Dft::Plan {
  fftw_plan handle = nullptr;
  ~Plan() {
    if (handle != nullptr) fftw_destroy_plan(handle);
  }
};

namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Dft::Dft(int n) : n_(n) {
  if (n < 1) throw InvalidArgument("Dft: length must be positive");
  std::lock_guard lock(plan_mutex());
  static std::map<int, std::shared_ptr<const Plan>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    auto plan = std::make_shared<Plan>();
    std::vector<std::complex<double>> a(n), b(n);
    plan->handle = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                                    reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan->handle == nullptr) throw NumericalError("Dft: FFTW plan creation failed");
    it = cache.emplace(n, std::move(plan)).first;
  }
  plan_ = it->second;
}

void Dft::forward(const std::complex<double>* in, std::complex<double>* out) const {
  // The new-array execute interface is thread safe; FFTW does not write to in.
  fftw_execute_dft(plan_->handle,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace rftbd
