#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lowlat/types.hpp"

namespace lowlat {

inline constexpr double kSpeedOfSound = 343.0;
inline constexpr int kFractionalDelayTaps = 64;

/// Uniform circular array; mic p sits at angle 2 pi p / P on a circle of radius diameter / 2.
struct ArrayGeometry {
  std::vector<std::array<double, 2>> mics;
  double diameter = 0.20;

  std::size_t channels() const { return mics.size(); }
  double radius() const { return diameter / 2.0; }
};

ArrayGeometry array_geometry(std::size_t channels = 6, double diameter = 0.20);

/// Far-field arrival time (seconds) of a plane wave from `azimuth` at each mic,
/// relative to the array centre. Negative values arrive before the centre.
std::vector<double> propagation_delays(const ArrayGeometry& geom, double azimuth,
                                       double speed_of_sound = kSpeedOfSound);

/// Delays `x` by `delay` samples (>= 0) with a Hann-windowed sinc, same output length.
Signal fractional_delay(std::span<const double> x, double delay);

/// Anechoic far-field rendering. Delays are shifted so the earliest mic has zero delay.
MultiSignal spatialize(std::span<const double> source, double azimuth, const ArrayGeometry& geom,
                       int sample_rate, double speed_of_sound = kSpeedOfSound);

struct SourceInfo {
  std::string role;  ///< "target", "background" or "foreground"
  std::string kind;  ///< generator used
  double azimuth_rad = 0.0;
  double level_db = 0.0;  ///< level relative to the background noise (noises only)
};

struct Scene {
  MultiSignal mixture;
  Signal target_direct;      ///< target at the reference mic
  MultiSignal target_image;  ///< target at every mic
  MultiSignal noise_image;   ///< summed, scaled noise at every mic
  std::vector<SourceInfo> sources;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  int sample_rate = 16000;
  std::size_t ref_mic = 0;
};

/// Mean power over samples whose magnitude exceeds -60 dBFS.
double active_power(std::span<const double> x);

/// Sums the noises and scales the sum so that the target-to-noise power ratio at
/// `ref_mic` equals `snr_db`. Noise 0 is the background; each further noise is
/// first levelled against it by a seeded draw from [-3, 9] dB of active power.
Scene mix(const MultiSignal& target, const std::vector<MultiSignal>& noises, double snr_db,
          std::uint64_t seed, std::size_t ref_mic = 0);

/// Deterministic synthetic source material.
namespace sources {
Signal speech_like(std::size_t n, int sample_rate, std::mt19937_64& rng);
Signal colored_noise(std::size_t n, double pole, std::mt19937_64& rng);
Signal multitone(std::size_t n, int sample_rate, std::span<const double> freqs_hz,
                 std::mt19937_64& rng);
Signal chirp(std::size_t n, int sample_rate, double f0_hz, double f1_hz);
}  // namespace sources

struct SceneSpec {
  std::size_t channels = 6;
  double diameter = 0.20;
  int sample_rate = 16000;
  double duration_s = 2.0;
  std::size_t noise_count = 2;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  std::size_t ref_mic = 0;
  /// Drawn from the seed when unset.
  std::optional<double> target_azimuth;
};

/// Target: speech-like source; noises: a colored background plus multitone/colored foregrounds,
/// all at distinct seeded azimuths.
Scene make_scene(const SceneSpec& spec);

}  // namespace lowlat
