#include "lowlat/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace lowlat {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double e = 0.0;
  for (double v : x) e += v * v;
  return e / static_cast<double>(x.size());
}

void normalize_peak(Signal& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (auto& v : x) v *= peak / m;
  }
}

double angular_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace

ArrayGeometry array_geometry(std::size_t channels, double diameter) {
  if (channels == 0) throw ValidationError("array needs at least one microphone");
  if (!(diameter > 0.0)) throw ValidationError("array diameter must be positive");
  ArrayGeometry g;
  g.diameter = diameter;
  const double r = diameter / 2.0;
  for (std::size_t p = 0; p < channels; ++p) {
    const double phi = kTwoPi * static_cast<double>(p) / static_cast<double>(channels);
    g.mics.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return g;
}

std::vector<double> propagation_delays(const ArrayGeometry& geom, double azimuth,
                                       double speed_of_sound) {
  std::vector<double> tau;
  tau.reserve(geom.channels());
  const double ux = std::cos(azimuth);
  const double uy = std::sin(azimuth);
  // -(r/c) cos(azimuth - phi_p), written as a projection onto the arrival direction.
  for (const auto& m : geom.mics) tau.push_back(-(m[0] * ux + m[1] * uy) / speed_of_sound);
  return tau;
}

Signal fractional_delay(std::span<const double> x, double delay) {
  if (!(delay >= 0.0) || !std::isfinite(delay)) {
    throw ValidationError("fractional_delay: delay must be finite and non-negative");
  }
  constexpr int half = kFractionalDelayTaps / 2;
  const auto n = static_cast<std::int64_t>(x.size());
  const auto whole = static_cast<std::int64_t>(std::floor(delay));
  const double frac = delay - static_cast<double>(whole);

  if (frac == 0.0) {
    Signal y(x.size(), 0.0);
    for (std::int64_t i = 0; i + whole < n; ++i) {
      y[static_cast<std::size_t>(i + whole)] = x[static_cast<std::size_t>(i)];
    }
    return y;
  }

  // Sub-sample delay `frac` is shared by every output sample, so the taps are too.
  std::array<double, kFractionalDelayTaps> taps{};
  for (int j = -half + 1; j <= half; ++j) {
    const double u = static_cast<double>(j) - frac;  // (out - delay) - i for i = base - j
    const double sinc = u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
    const double w = std::abs(u) < half ? 0.5 + 0.5 * std::cos(std::numbers::pi * u / half) : 0.0;
    taps[static_cast<std::size_t>(j + half - 1)] = sinc * w;
  }

  Signal y(x.size(), 0.0);
  for (std::int64_t out = 0; out < n; ++out) {
    const std::int64_t base = out - whole;
    double acc = 0.0;
    for (int j = -half + 1; j <= half; ++j) {
      const std::int64_t i = base - j;
      if (i >= 0 && i < n) acc += x[static_cast<std::size_t>(i)] * taps[static_cast<std::size_t>(j + half - 1)];
    }
    y[static_cast<std::size_t>(out)] = acc;
  }
  return y;
}

MultiSignal spatialize(std::span<const double> source, double azimuth, const ArrayGeometry& geom,
                       int sample_rate, double speed_of_sound) {
  for (double v : source) {
    if (!std::isfinite(v)) throw ValidationError("spatialize: non-finite source sample");
  }
  const auto tau = propagation_delays(geom, azimuth, speed_of_sound);
  const double earliest = *std::min_element(tau.begin(), tau.end());
  MultiSignal out;
  out.reserve(tau.size());
  for (double t : tau) out.push_back(fractional_delay(source, (t - earliest) * sample_rate));
  return out;
}

double active_power(std::span<const double> x) {
  constexpr double threshold = 1e-3;  // -60 dBFS
  double e = 0.0;
  std::size_t count = 0;
  for (double v : x) {
    if (std::abs(v) > threshold) {
      e += v * v;
      ++count;
    }
  }
  return count == 0 ? 0.0 : e / static_cast<double>(count);
}

Scene mix(const MultiSignal& target, const std::vector<MultiSignal>& noises, double snr_db,
          std::uint64_t seed, std::size_t ref_mic) {
  if (target.empty()) throw ValidationError("mix: target has no channels");
  if (noises.empty()) throw ValidationError("mix: at least one noise is required");
  const std::size_t channels = target.size();
  const std::size_t length = target.front().size();
  if (ref_mic >= channels) throw ValidationError("mix: ref_mic out of range");
  auto check_shape = [&](const MultiSignal& s, const char* what) {
    if (s.size() != channels) throw ValidationError(std::string("mix: ") + what + " channel count differs");
    for (const auto& ch : s) {
      if (ch.size() != length) throw ValidationError(std::string("mix: ") + what + " length differs");
    }
  };
  check_shape(target, "target");
  for (const auto& n : noises) check_shape(n, "noise");

  const double target_power = mean_power(target[ref_mic]);
  if (target_power == 0.0) throw ValidationError("mix: target has zero power");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> level_dist(-3.0, 9.0);

  Scene scene;
  scene.sample_rate = 0;
  scene.seed = seed;
  scene.snr_db = snr_db;
  scene.ref_mic = ref_mic;

  const double background_power = active_power(noises.front()[ref_mic]);
  if (background_power == 0.0) throw ValidationError("mix: noise 0 has zero power");
  MultiSignal noise_sum = noises.front();
  scene.sources.push_back({"background", "", 0.0, 0.0});
  for (std::size_t j = 1; j < noises.size(); ++j) {
    const double p = active_power(noises[j][ref_mic]);
    if (p == 0.0) throw ValidationError("mix: noise " + std::to_string(j) + " has zero power");
    const double level = level_dist(rng);  // background minus foreground, dB
    const double gain = std::sqrt(background_power / p * std::pow(10.0, -level / 10.0));
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t i = 0; i < length; ++i) noise_sum[c][i] += gain * noises[j][c][i];
    }
    scene.sources.push_back({"foreground", "", 0.0, -level});
  }

  const double noise_power = mean_power(noise_sum[ref_mic]);
  if (noise_power == 0.0) throw ValidationError("mix: summed noise has zero power");
  const double scale = std::sqrt(target_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
  for (auto& ch : noise_sum) {
    for (auto& v : ch) v *= scale;
  }

  scene.mixture.assign(channels, Signal(length));
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < length; ++i) scene.mixture[c][i] = target[c][i] + noise_sum[c][i];
  }
  scene.target_image = target;
  scene.target_direct = target[ref_mic];
  scene.noise_image = std::move(noise_sum);
  return scene;
}

namespace sources {

Signal speech_like(std::size_t n, int sample_rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double fs = sample_rate;
  const double f0_base = 110.0 + 90.0 * uni(rng);
  const double vibrato_phase = kTwoPi * uni(rng);
  const double syllable_rate = 3.0 + 2.0 * uni(rng);
  const double syllable_phase = kTwoPi * uni(rng);
  const double formant1 = 500.0 + 300.0 * uni(rng);
  const double formant2 = 1400.0 + 800.0 * uni(rng);

  Signal x(n, 0.0);
  double phase = 0.0;
  double breath = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double f0 = f0_base * (1.0 + 0.15 * std::sin(kTwoPi * 0.6 * t + vibrato_phase));
    phase += kTwoPi * f0 / fs;
    double voiced = 0.0;
    for (int k = 1; f0 * k < 0.45 * fs && k <= 40; ++k) {
      const double fk = f0 * k;
      const double env = std::exp(-std::pow((fk - formant1) / 250.0, 2)) +
                         0.6 * std::exp(-std::pow((fk - formant2) / 400.0, 2)) + 0.05;
      voiced += env * std::sin(k * phase) / k;
    }
    const double syllable = std::sin(kTwoPi * syllable_rate * t + syllable_phase);
    const double gate = syllable > -0.3 ? std::pow(0.5 + 0.5 * syllable, 1.5) : 0.0;
    breath = 0.9 * breath + 0.1 * gauss(rng);
    x[i] = gate * (voiced + 0.3 * breath);
  }
  normalize_peak(x, 0.5);
  return x;
}

Signal colored_noise(std::size_t n, double pole, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Signal x(n);
  double state = 0.0;
  for (auto& v : x) {
    state = pole * state + gauss(rng);
    v = state;
  }
  normalize_peak(x, 0.5);
  return x;
}

Signal multitone(std::size_t n, int sample_rate, std::span<const double> freqs_hz,
                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  std::vector<double> phases;
  for (std::size_t k = 0; k < freqs_hz.size(); ++k) phases.push_back(uni(rng));
  Signal x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    for (std::size_t k = 0; k < freqs_hz.size(); ++k) x[i] += std::sin(kTwoPi * freqs_hz[k] * t + phases[k]);
  }
  normalize_peak(x, 0.5);
  return x;
}

Signal chirp(std::size_t n, int sample_rate, double f0_hz, double f1_hz) {
  Signal x(n);
  const double duration = static_cast<double>(n) / sample_rate;
  const double rate = (f1_hz - f0_hz) / duration;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    x[i] = 0.5 * std::sin(kTwoPi * (f0_hz * t + 0.5 * rate * t * t));
  }
  return x;
}

}  // namespace sources

Scene make_scene(const SceneSpec& spec) {
  if (!(spec.duration_s > 0.0)) throw ValidationError("scene duration must be positive");
  if (spec.noise_count == 0) throw ValidationError("scene needs at least one noise source");
  const auto geom = array_geometry(spec.channels, spec.diameter);
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate));
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);

  std::vector<double> azimuths;
  azimuths.push_back(spec.target_azimuth ? *spec.target_azimuth : angle(rng));
  const double min_separation = 20.0 * std::numbers::pi / 180.0;
  while (azimuths.size() < spec.noise_count + 1) {
    const double a = angle(rng);
    const bool clear = std::all_of(azimuths.begin(), azimuths.end(), [&](double b) {
      return angular_distance(a, b) >= min_separation;
    });
    if (clear) azimuths.push_back(a);
  }

  const auto target_src = sources::speech_like(n, spec.sample_rate, rng);
  const auto target = spatialize(target_src, azimuths[0], geom, spec.sample_rate);

  std::vector<MultiSignal> noises;
  std::vector<std::string> kinds;
  for (std::size_t j = 0; j < spec.noise_count; ++j) {
    Signal src;
    if (j % 2 == 0) {
      src = sources::colored_noise(n, j == 0 ? 0.9 : 0.5, rng);
      kinds.emplace_back("colored_noise");
    } else {
      std::uniform_real_distribution<double> freq(150.0, 3000.0);
      const std::array<double, 4> freqs{freq(rng), freq(rng), freq(rng), freq(rng)};
      src = sources::multitone(n, spec.sample_rate, freqs, rng);
      kinds.emplace_back("multitone");
    }
    noises.push_back(spatialize(src, azimuths[j + 1], geom, spec.sample_rate));
  }

  auto scene = mix(target, noises, spec.snr_db, rng(), spec.ref_mic);
  scene.sample_rate = spec.sample_rate;
  scene.seed = spec.seed;
  scene.sources.insert(scene.sources.begin(), {"target", "speech_like", azimuths[0], 0.0});
  for (std::size_t j = 0; j < spec.noise_count; ++j) {
    scene.sources[j + 1].kind = kinds[j];
    scene.sources[j + 1].azimuth_rad = azimuths[j + 1];
  }
  return scene;
}

}  // namespace lowlat
