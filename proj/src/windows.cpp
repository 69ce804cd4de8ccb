#include "lowlat/windows.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "lowlat/types.hpp"

namespace lowlat {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<double> tukey_samples(std::size_t n_samples, double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5)) {
    throw ValidationError("tukey_alpha must lie in (0, 0.5], got " + std::to_string(alpha));
  }
  const double n_total = static_cast<double>(n_samples);
  const double taper = alpha * n_total;
  auto rising = [taper](double n) { return 0.5 - 0.5 * std::cos(std::numbers::pi * n / taper); };

  std::vector<double> g(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double n = static_cast<double>(i);
    if (n <= taper) {
      g[i] = rising(n);
    } else if (n >= n_total - taper) {
      g[i] = rising(n_total - n);
    } else {
      g[i] = 1.0;
    }
  }
  return g;
}

std::vector<double> asqrt_hann_samples(std::size_t n_samples, std::size_t output_window) {
  if (output_window == 0 || output_window % 4 != 0) {
    throw ValidationError(
        "AsqrtHann needs an output window length divisible by 4 to size its right half, got " +
        std::to_string(output_window));
  }
  const std::size_t right = output_window / 4;
  if (right >= n_samples) {
    throw ValidationError("AsqrtHann right half (" + std::to_string(right) +
                          " samples) does not fit in a window of " + std::to_string(n_samples));
  }
  const std::size_t left = n_samples - right;

  const auto long_window = sqrt_hann_samples(2 * left);
  const auto short_window = sqrt_hann_samples(2 * right);
  std::vector<double> g;
  g.reserve(n_samples);
  g.insert(g.end(), long_window.begin(), long_window.begin() + static_cast<std::ptrdiff_t>(left));
  g.insert(g.end(), short_window.begin() + static_cast<std::ptrdiff_t>(right), short_window.end());
  return g;
}

}  // namespace

WindowKind WindowKind::parse(std::string_view name, double tukey_alpha) {
  const auto key = lower(name);
  if (key == "sqrthann") return sqrt_hann();
  if (key == "asqrthann") return asqrt_hann();
  if (key == "rect" || key == "rectangular") return rect();
  if (key == "tukey") return tukey(tukey_alpha);
  throw ValidationError("unknown window kind '" + std::string(name) +
                        "' (expected sqrthann, asqrthann, rect or tukey)");
}

std::string WindowKind::name() const {
  switch (variant) {
    case Variant::SqrtHann: return "sqrthann";
    case Variant::AsqrtHann: return "asqrthann";
    case Variant::Rect: return "rect";
    case Variant::Tukey: return "tukey";
  }
  return "unknown";
}

AnalysisWindow::AnalysisWindow(std::vector<double> samples, WindowKind kind)
    : samples_(std::move(samples)), kind_(kind) {
  if (samples_.empty()) throw ValidationError("analysis window must have at least one sample");
}

AnalysisWindow AnalysisWindow::scaled(double factor) const {
  auto out = samples_;
  for (auto& v : out) v *= factor;
  return AnalysisWindow(std::move(out), kind_);
}

SynthesisWindow::SynthesisWindow(std::vector<double> samples, std::size_t hop)
    : samples_(std::move(samples)), hop_(hop) {
  if (hop_ == 0 || samples_.empty() || samples_.size() % hop_ != 0) {
    throw ValidationError("synthesis window length must be a positive multiple of the hop");
  }
}

std::vector<double> sqrt_hann_samples(std::size_t n_samples) {
  std::vector<double> w(n_samples);
  const double n_total = static_cast<double>(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    w[i] = std::sin(std::numbers::pi * static_cast<double>(i) / n_total);
  }
  return w;
}

AnalysisWindow make_analysis_window(const WindowKind& kind, std::size_t n_samples,
                                    std::size_t output_window) {
  if (n_samples == 0) throw ValidationError("window length must be positive");
  switch (kind.variant) {
    case WindowKind::Variant::SqrtHann:
      return AnalysisWindow(sqrt_hann_samples(n_samples), kind);
    case WindowKind::Variant::AsqrtHann:
      return AnalysisWindow(asqrt_hann_samples(n_samples, output_window), kind);
    case WindowKind::Variant::Rect:
      return AnalysisWindow(std::vector<double>(n_samples, 1.0), kind);
    case WindowKind::Variant::Tukey:
      return AnalysisWindow(tukey_samples(n_samples, kind.tukey_alpha), kind);
  }
  throw ValidationError("unhandled window kind");
}

SynthesisWindow make_synthesis_window(const AnalysisWindow& g, std::size_t a_samples,
                                      std::size_t b_samples) {
  const std::size_t n = g.size();
  if (b_samples == 0 || a_samples == 0 || a_samples % b_samples != 0) {
    throw ValidationError("output window (" + std::to_string(a_samples) +
                          ") must be a positive multiple of the hop (" +
                          std::to_string(b_samples) + ")");
  }
  if (a_samples > n) {
    throw ValidationError("output window (" + std::to_string(a_samples) +
                          ") exceeds the analysis window (" + std::to_string(n) + ")");
  }
  const std::size_t offset = n - a_samples;
  const std::size_t overlap = a_samples / b_samples;

  std::vector<double> l(a_samples);
  for (std::size_t i = 0; i < a_samples; ++i) {
    double denom = 0.0;
    for (std::size_t k = 0; k < overlap; ++k) {
      const double v = g[offset + (i % b_samples) + k * b_samples];
      denom += v * v;
    }
    if (denom == 0.0) {
      throw ValidationError("synthesis window denominator vanishes at n = " + std::to_string(i) +
                            "; the analysis window is zero on the whole hop-aligned comb");
    }
    l[i] = g[offset + i] / denom;
  }
  return SynthesisWindow(std::move(l), b_samples);
}

double verify_cola(const AnalysisWindow& g, const SynthesisWindow& l, std::size_t n_dft) {
  const std::size_t a = l.size();
  const std::size_t b = l.hop();
  if (a > g.size() || g.size() > n_dft) {
    throw ValidationError("verify_cola: window sizes must satisfy ows <= iws <= n_dft");
  }
  const std::size_t offset = g.size() - a;
  double residual = 0.0;
  for (std::size_t m = 0; m < b; ++m) {
    double gain = 0.0;
    for (std::size_t idx = m; idx < a; idx += b) gain += g[offset + idx] * l[idx];
    residual = std::max(residual, std::abs(gain - 1.0));
  }
  return residual;
}

}  // namespace lowlat
