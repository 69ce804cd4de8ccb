#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "lowlat/framing.hpp"
#include "lowlat/windows.hpp"

namespace lowlat {

/// Perfect matches report this value instead of +inf.
inline constexpr double kSiSdrCapDb = 100.0;

/// Scale-invariant SDR in dB of `estimate` against `reference`.
///
/// With a non-zero `offset`, estimate[n + offset] is compared with reference[n]
/// over the overlapping samples. Lengths must match either way.
double si_sdr(std::span<const double> estimate, std::span<const double> reference,
              std::int64_t offset = 0);

/// Sum of the L1 distances of the real parts, imaginary parts and magnitudes.
double ri_mag_loss(std::span<const SpectrumFrame> estimate, std::span<const SpectrumFrame> target);

/// STFT used only inside wav_mag_loss; independent of the enhancement framing.
struct LossStft {
  WindowKind window = WindowKind::sqrt_hann();
  std::size_t window_samples = 512;  ///< 32 ms at 16 kHz
  std::size_t hop_samples = 128;     ///< 8 ms at 16 kHz

  /// 32 ms sqrtHann window with an 8 ms hop at `sample_rate`.
  static LossStft for_rate(int sample_rate);
  FrameParams frame_params() const;
};

/// L1 waveform distance plus L1 distance of STFT magnitudes.
double wav_mag_loss(std::span<const double> estimate, std::span<const double> target,
                    const LossStft& stft = {});

/// Number of terms summed by wav_mag_loss for a signal of `length` samples.
std::size_t wav_mag_loss_elements(std::size_t length, const LossStft& stft = {});

struct LossValue {
  double sum = 0.0;
  double mean = 0.0;  ///< sum divided by the number of summed terms
};

struct MetricReport {
  double si_sdr_db = 0.0;
  LossValue ri_mag_loss;
  LossValue wav_mag_loss;
  std::size_t samples = 0;
  std::size_t frames = 0;
  std::int64_t offset = 0;
};

}  // namespace lowlat
