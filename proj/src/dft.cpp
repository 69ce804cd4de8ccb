#include "lowlat/dft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <string>

namespace lowlat {

namespace {
// FFTW's planner is not thread-safe; execution with distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealDft::Plans {
  explicit Plans(std::size_t n) : n(n) {
    time = fftw_alloc_real(n);
    freq = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    const int size = static_cast<int>(n);
    forward = fftw_plan_dft_r2c_1d(size, time, freq, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(size, freq, time, FFTW_ESTIMATE);
  }
  ~Plans() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(forward);
      fftw_destroy_plan(inverse);
    }
    fftw_free(time);
    fftw_free(freq);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;

  std::size_t n;
  double* time = nullptr;
  fftw_complex* freq = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

RealDft::RealDft(std::size_t n) : n_(n) {
  if (n == 0 || n % 2 != 0) {
    throw ValidationError("DFT size must be positive and even, got " + std::to_string(n));
  }
  plans_ = std::make_unique<Plans>(n);
}

RealDft::RealDft(const RealDft& other) : RealDft(other.n_) {}

RealDft& RealDft::operator=(const RealDft& other) {
  if (this != &other) {
    n_ = other.n_;
    plans_ = std::make_unique<Plans>(n_);
  }
  return *this;
}

RealDft::RealDft(RealDft&&) noexcept = default;
RealDft& RealDft::operator=(RealDft&&) noexcept = default;
RealDft::~RealDft() = default;

void RealDft::forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() > n_ || out.size() != bins()) {
    throw ValidationError("RealDft::forward: buffer size mismatch");
  }
  std::copy(in.begin(), in.end(), plans_->time);
  std::fill(plans_->time + in.size(), plans_->time + n_, 0.0);
  fftw_execute(plans_->forward);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = Complex(plans_->freq[k][0], plans_->freq[k][1]);
  }
}

void RealDft::inverse(std::span<const Complex> in, std::span<double> out) {
  if (in.size() != bins() || out.size() != n_) {
    throw ValidationError("RealDft::inverse: buffer size mismatch");
  }
  for (std::size_t k = 0; k < in.size(); ++k) {
    plans_->freq[k][0] = in[k].real();
    plans_->freq[k][1] = in[k].imag();
  }
  // c2r overwrites its input; freq is rewritten on every call.
  fftw_execute(plans_->inverse);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = plans_->time[i] * scale;
}

}  // namespace lowlat
