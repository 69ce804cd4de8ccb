#include "lowlat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lowlat {

double si_sdr(std::span<const double> estimate, std::span<const double> reference,
              std::int64_t offset) {
  if (estimate.size() != reference.size()) {
    throw ValidationError("si_sdr: estimate has " + std::to_string(estimate.size()) +
                          " samples, reference " + std::to_string(reference.size()));
  }
  const auto n = static_cast<std::int64_t>(reference.size());
  const std::int64_t first = std::max<std::int64_t>(0, -offset);
  const std::int64_t last = std::min<std::int64_t>(n, n - offset);

  double cross = 0.0;
  double ref_energy = 0.0;
  for (std::int64_t i = first; i < last; ++i) {
    const double s = reference[static_cast<std::size_t>(i)];
    cross += estimate[static_cast<std::size_t>(i + offset)] * s;
    ref_energy += s * s;
  }
  if (ref_energy == 0.0) throw ValidationError("si_sdr: reference is all zeros");

  const double alpha = cross / ref_energy;
  double target_energy = 0.0;
  double error_energy = 0.0;
  for (std::int64_t i = first; i < last; ++i) {
    const double scaled = alpha * reference[static_cast<std::size_t>(i)];
    const double err = scaled - estimate[static_cast<std::size_t>(i + offset)];
    target_energy += scaled * scaled;
    error_energy += err * err;
  }
  if (target_energy == 0.0) return -kSiSdrCapDb;
  if (error_energy == 0.0) return kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(target_energy / error_energy), -kSiSdrCapDb, kSiSdrCapDb);
}

double ri_mag_loss(std::span<const SpectrumFrame> estimate,
                   std::span<const SpectrumFrame> target) {
  if (estimate.size() != target.size()) {
    throw ValidationError("ri_mag_loss: " + std::to_string(estimate.size()) + " vs " +
                          std::to_string(target.size()) + " frames");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < estimate.size(); ++t) {
    const auto& a = estimate[t].bins;
    const auto& b = target[t].bins;
    if (a.size() != b.size()) {
      throw ValidationError("ri_mag_loss: bin count differs at frame " + std::to_string(t));
    }
    for (std::size_t f = 0; f < a.size(); ++f) {
      total += std::abs(a[f].real() - b[f].real()) + std::abs(a[f].imag() - b[f].imag()) +
               std::abs(std::abs(a[f]) - std::abs(b[f]));
    }
  }
  return total;
}

LossStft LossStft::for_rate(int sample_rate) {
  LossStft s;
  const auto win = static_cast<double>(sample_rate) * 0.032;
  const auto hop = static_cast<double>(sample_rate) * 0.008;
  if (win != std::round(win) || hop != std::round(hop)) {
    throw ValidationError("loss STFT lengths are fractional at " + std::to_string(sample_rate) +
                          " Hz");
  }
  s.window_samples = static_cast<std::size_t>(win);
  s.hop_samples = static_cast<std::size_t>(hop);
  return s;
}

FrameParams LossStft::frame_params() const {
  FrameParams p;
  p.iws = window_samples;
  p.ows = hop_samples;
  p.hop = hop_samples;
  p.n_dft = window_samples + window_samples % 2;
  p.frames_ahead = 0;
  return p;
}

std::size_t wav_mag_loss_elements(std::size_t length, const LossStft& stft) {
  const auto p = stft.frame_params();
  return length + static_cast<std::size_t>(frames_to_cover(static_cast<std::int64_t>(length), p)) *
                      p.bins();
}

double wav_mag_loss(std::span<const double> estimate, std::span<const double> target,
                    const LossStft& stft) {
  if (estimate.size() != target.size()) {
    throw ValidationError("wav_mag_loss: " + std::to_string(estimate.size()) + " vs " +
                          std::to_string(target.size()) + " samples");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) total += std::abs(estimate[i] - target[i]);

  const auto params = stft.frame_params();
  const auto window = make_analysis_window(stft.window, params.iws, params.ows);
  const auto n_frames = frames_to_cover(static_cast<std::int64_t>(estimate.size()), params);
  const auto a = analyze_signal(estimate, window, params, n_frames);
  const auto b = analyze_signal(target, window, params, n_frames);
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::size_t f = 0; f < a[t].bins.size(); ++f) {
      total += std::abs(std::abs(a[t].bins[f]) - std::abs(b[t].bins[f]));
    }
  }
  return total;
}

}  // namespace lowlat
