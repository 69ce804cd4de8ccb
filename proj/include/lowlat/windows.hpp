#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lowlat {

struct WindowKind {
  enum class Variant { SqrtHann, AsqrtHann, Rect, Tukey };

  Variant variant = Variant::Tukey;
  /// Fraction of the window tapered at each end; only meaningful for Tukey.
  double tukey_alpha = 1.0 / 16.0;

  static WindowKind sqrt_hann() { return {Variant::SqrtHann, 0.0}; }
  static WindowKind asqrt_hann() { return {Variant::AsqrtHann, 0.0}; }
  static WindowKind rect() { return {Variant::Rect, 0.0}; }
  static WindowKind tukey(double alpha = 1.0 / 16.0) { return {Variant::Tukey, alpha}; }

  /// Parses "sqrthann", "asqrthann", "rect" or "tukey" (case-insensitive).
  static WindowKind parse(std::string_view name, double tukey_alpha = 1.0 / 16.0);
  std::string name() const;
};

class AnalysisWindow {
 public:
  AnalysisWindow(std::vector<double> samples, WindowKind kind);

  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t n) const { return samples_[n]; }
  const WindowKind& kind() const { return kind_; }

  AnalysisWindow scaled(double factor) const;

 private:
  std::vector<double> samples_;
  WindowKind kind_;
};

class SynthesisWindow {
 public:
  /// `samples.size()` is the output window length; it must be a positive multiple of `hop`.
  SynthesisWindow(std::vector<double> samples, std::size_t hop);

  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  std::size_t hop() const { return hop_; }
  double operator[](std::size_t n) const { return samples_[n]; }

 private:
  std::vector<double> samples_;
  std::size_t hop_;
};

/// Periodic square-root Hann: sin(pi n / N).
std::vector<double> sqrt_hann_samples(std::size_t n_samples);

/// Builds an analysis window of `n_samples` samples.
///
/// AsqrtHann joins the rising half of a long sqrtHann with the falling half
/// of a short one. The short half spans `output_window / 4` samples, which
/// gives 240 + 16 samples for a 256-sample window with a 64-sample output
/// window. `output_window` is ignored for the other kinds.
AnalysisWindow make_analysis_window(const WindowKind& kind, std::size_t n_samples,
                                    std::size_t output_window = 0);

/// Perfect-reconstruction synthesis window over the last `a_samples` samples of `g`
/// for hop `b_samples`:
///   l[n] = g[N-A+n] / sum_k g[N-A+(n mod B)+kB]^2
SynthesisWindow make_synthesis_window(const AnalysisWindow& g, std::size_t a_samples,
                                      std::size_t b_samples);

/// Max deviation from 1 of the steady-state overlap-add gain sum_j g[N-A+m+jB] l[m+jB].
double verify_cola(const AnalysisWindow& g, const SynthesisWindow& l, std::size_t n_dft);

inline constexpr double kColaTolerance = 1e-10;

}  // namespace lowlat
