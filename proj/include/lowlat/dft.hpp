#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "lowlat/types.hpp"

namespace lowlat {

/// One-sided real DFT of a fixed size.
///
/// Forward is unnormalized; inverse scales by 1/n. Instances own their scratch
/// buffers, so a single instance must not be used from two threads at once.
class RealDft {
 public:
  explicit RealDft(std::size_t n);
  RealDft(const RealDft& other);
  RealDft& operator=(const RealDft& other);
  RealDft(RealDft&&) noexcept;
  RealDft& operator=(RealDft&&) noexcept;
  ~RealDft();

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// `in` may be shorter than size(); it is zero-padded on the right.
  void forward(std::span<const double> in, std::span<Complex> out);
  /// Imaginary parts of the DC and Nyquist bins are ignored.
  void inverse(std::span<const Complex> in, std::span<double> out);

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace lowlat
