#include "lowlat/framing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lowlat {

namespace {

std::size_t ms_to_samples(double ms, int sample_rate, const char* what) {
  const double exact = ms * sample_rate / 1000.0;
  const double rounded = std::round(exact);
  if (exact <= 0.0 || std::abs(exact - rounded) > 1e-9) {
    throw ValidationError(std::string(what) + " of " + std::to_string(ms) + " ms is not a whole " +
                          "positive number of samples at " + std::to_string(sample_rate) + " Hz");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

void FrameParams::validate() const {
  if (sample_rate <= 0) throw ValidationError("sample_rate must be positive");
  if (hop == 0 || ows == 0 || iws == 0 || n_dft == 0) {
    throw ValidationError("iws, ows, hop and n_dft must all be positive");
  }
  if (ows % hop != 0) {
    throw ValidationError("ows (" + std::to_string(ows) + ") must be divisible by hop (" +
                          std::to_string(hop) + ")");
  }
  if (ows > iws) {
    throw ValidationError("ows (" + std::to_string(ows) + ") must not exceed iws (" +
                          std::to_string(iws) + ")");
  }
  if (iws > n_dft) {
    throw ValidationError("iws (" + std::to_string(iws) + ") must not exceed n_dft (" +
                          std::to_string(n_dft) + ")");
  }
  if (n_dft % 2 != 0) throw ValidationError("n_dft must be even");
  if (frames_ahead < 0) throw ValidationError("frames_ahead must be >= 0");
}

FrameParams FrameParams::from_ms(int sample_rate, double iws_ms, double ows_ms, double hop_ms,
                                 std::size_t n_dft, int frames_ahead) {
  if (sample_rate <= 0) throw ValidationError("sample_rate must be positive");
  FrameParams p;
  p.sample_rate = sample_rate;
  p.iws = ms_to_samples(iws_ms, sample_rate, "iws");
  p.ows = ms_to_samples(ows_ms, sample_rate, "ows");
  p.hop = ms_to_samples(hop_ms, sample_rate, "hop");
  p.n_dft = n_dft;
  p.frames_ahead = frames_ahead;
  p.validate();
  return p;
}

bool operator==(const FrameParams& a, const FrameParams& b) {
  return a.sample_rate == b.sample_rate && a.iws == b.iws && a.ows == b.ows && a.hop == b.hop &&
         a.n_dft == b.n_dft && a.frames_ahead == b.frames_ahead;
}

SpectrumFrame MultiSpectrumFrame::channel(Eigen::Index p) const {
  SpectrumFrame out;
  out.frame_index = frame_index;
  out.bins.resize(static_cast<std::size_t>(bins.cols()));
  for (Eigen::Index f = 0; f < bins.cols(); ++f) out.bins[static_cast<std::size_t>(f)] = bins(p, f);
  return out;
}

// ---------------------------------------------------------------------------

StreamAnalyzer::StreamAnalyzer(const FrameParams& params, AnalysisWindow window,
                               std::size_t channels)
    : params_(params), window_(std::move(window)), dft_(params.n_dft) {
  params_.validate();
  if (window_.size() != params_.iws) {
    throw ValidationError("analysis window length " + std::to_string(window_.size()) +
                          " does not match iws " + std::to_string(params_.iws));
  }
  if (channels == 0) throw ValidationError("analyzer needs at least one channel");
  buffers_.assign(channels, Signal(params_.iws, 0.0));
  fill_ = params_.iws - params_.hop;
  windowed_.resize(params_.iws);
  spectrum_.resize(params_.bins());
}

std::vector<MultiSpectrumFrame> StreamAnalyzer::push(const MultiSignal& chunk) {
  if (chunk.size() != buffers_.size()) {
    throw ValidationError("chunk has " + std::to_string(chunk.size()) +
                          " channels, analyzer expects " + std::to_string(buffers_.size()));
  }
  const std::size_t length = chunk.front().size();
  for (const auto& ch : chunk) {
    if (ch.size() != length) throw ValidationError("chunk channels differ in length");
  }
  return push_impl(length, [&](std::size_t p, std::size_t i) { return chunk[p][i]; });
}

std::vector<MultiSpectrumFrame> StreamAnalyzer::push(std::span<const double> mono) {
  if (buffers_.size() != 1) throw ValidationError("mono push on a multichannel analyzer");
  return push_impl(mono.size(), [&](std::size_t, std::size_t i) { return mono[i]; });
}

template <typename ChannelAt>
std::vector<MultiSpectrumFrame> StreamAnalyzer::push_impl(std::size_t length,
                                                          ChannelAt&& channel_at) {
  std::vector<MultiSpectrumFrame> frames;
  std::size_t pos = 0;
  while (pos < length) {
    const std::size_t take = std::min(params_.iws - fill_, length - pos);
    for (std::size_t p = 0; p < buffers_.size(); ++p) {
      for (std::size_t i = 0; i < take; ++i) buffers_[p][fill_ + i] = channel_at(p, pos + i);
    }
    fill_ += take;
    pos += take;
    if (fill_ == params_.iws) frames.push_back(emit());
  }
  samples_ingested_ += static_cast<std::int64_t>(length);
  return frames;
}

MultiSpectrumFrame StreamAnalyzer::emit() {
  MultiSpectrumFrame frame;
  frame.frame_index = frames_emitted_++;
  frame.bins.resize(static_cast<Eigen::Index>(buffers_.size()),
                    static_cast<Eigen::Index>(params_.bins()));
  const auto g = window_.samples();
  for (std::size_t p = 0; p < buffers_.size(); ++p) {
    auto& buf = buffers_[p];
    for (std::size_t i = 0; i < params_.iws; ++i) windowed_[i] = g[i] * buf[i];
    dft_.forward(windowed_, spectrum_);
    for (std::size_t f = 0; f < spectrum_.size(); ++f) {
      frame.bins(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(f)) = spectrum_[f];
    }
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(params_.hop), buf.end(), buf.begin());
  }
  fill_ = params_.iws - params_.hop;
  return frame;
}

// ---------------------------------------------------------------------------

FrameSynthesizer::FrameSynthesizer(const FrameParams& params, SynthesisWindow window)
    : params_(params), window_(std::move(window)), dft_(params.n_dft) {
  params_.validate();
  if (window_.size() != params_.ows || window_.hop() != params_.hop) {
    throw ValidationError("synthesis window does not match ows/hop");
  }
  time_.resize(params_.n_dft);
}

Signal FrameSynthesizer::synthesize(const SpectrumFrame& frame) {
  if (frame.bins.size() != params_.bins()) {
    throw ValidationError("frame has " + std::to_string(frame.bins.size()) + " bins, expected " +
                          std::to_string(params_.bins()));
  }
  for (const auto& b : frame.bins) {
    if (!std::isfinite(b.real()) || !std::isfinite(b.imag())) {
      throw ValidationError("non-finite bin in frame " + std::to_string(frame.frame_index));
    }
  }
  dft_.inverse(frame.bins, time_);
  const std::size_t first = params_.iws - params_.ows;
  Signal chunk(params_.ows);
  for (std::size_t i = 0; i < params_.ows; ++i) chunk[i] = time_[first + i] * window_[i];
  return chunk;
}

Signal synthesize_frame(const SpectrumFrame& frame, const SynthesisWindow& l,
                        const FrameParams& params) {
  FrameSynthesizer synth(params, l);
  return synth.synthesize(frame);
}

// ---------------------------------------------------------------------------

OverlapAdder::OverlapAdder(const FrameParams& params) : params_(params) {
  params_.validate();
  start_ = static_cast<std::int64_t>(params_.hop) - static_cast<std::int64_t>(params_.ows);
}

Signal OverlapAdder::push(std::span<const double> chunk, std::int64_t t) {
  if (chunk.size() != params_.ows) {
    throw ValidationError("overlap-add chunk must have ows = " + std::to_string(params_.ows) +
                          " samples");
  }
  if (t != expected_t_) {
    throw ValidationError("overlap-add frames out of order: got " + std::to_string(t) +
                          ", expected " + std::to_string(expected_t_));
  }
  ++expected_t_;

  const auto hop = static_cast<std::int64_t>(params_.hop);
  const auto ows = static_cast<std::int64_t>(params_.ows);
  const std::int64_t slot = schedule_frame(t, params_.frames_ahead);
  const std::int64_t begin = (slot + 1) * hop - ows;
  const std::int64_t end = begin + ows;

  while (start_ + static_cast<std::int64_t>(acc_.size()) < end) acc_.push_back(0.0);
  const auto offset = static_cast<std::size_t>(begin - start_);
  for (std::size_t i = 0; i < chunk.size(); ++i) acc_[offset + i] += chunk[i];

  const std::int64_t final_below = (slot + 2) * hop - ows;
  Signal out;
  while (start_ < final_below) {
    if (start_ >= 0) out.push_back(acc_.front());
    acc_.pop_front();
    ++start_;
  }
  released_ += static_cast<std::int64_t>(out.size());
  return out;
}

// ---------------------------------------------------------------------------

std::int64_t algorithmic_latency_samples(const FrameParams& params) {
  return static_cast<std::int64_t>(params.ows) -
         static_cast<std::int64_t>(params.frames_ahead) * static_cast<std::int64_t>(params.hop);
}

double algorithmic_latency(const FrameParams& params) {
  return params.samples_to_ms(static_cast<double>(algorithmic_latency_samples(params)));
}

std::int64_t frames_to_cover(std::int64_t length, const FrameParams& params) {
  const auto hop = static_cast<std::int64_t>(params.hop);
  return (length + static_cast<std::int64_t>(params.ows) + hop - 1) / hop;
}

std::vector<SpectrumFrame> analyze_signal(std::span<const double> signal,
                                          const AnalysisWindow& window, const FrameParams& params,
                                          std::int64_t n_frames) {
  StreamAnalyzer analyzer(params, window, 1);
  std::vector<SpectrumFrame> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n_frames, 0)));
  auto keep = [&](std::vector<MultiSpectrumFrame>&& frames) {
    for (auto& f : frames) {
      if (static_cast<std::int64_t>(out.size()) < n_frames) out.push_back(f.channel(0));
    }
  };
  const std::size_t usable =
      std::min(signal.size(), static_cast<std::size_t>(std::max<std::int64_t>(n_frames, 0)) *
                                  params.hop);
  keep(analyzer.push(signal.first(usable)));
  const Signal silence(params.hop, 0.0);
  while (static_cast<std::int64_t>(out.size()) < n_frames) keep(analyzer.push(silence));
  return out;
}

Signal overlap_add_frames(std::span<const SpectrumFrame> frames, const SynthesisWindow& l,
                          const FrameParams& params, std::size_t length) {
  FrameSynthesizer synth(params, l);
  OverlapAdder ola(params);
  Signal out;
  out.reserve(length);
  for (std::size_t t = 0; t < frames.size() && out.size() < length; ++t) {
    const auto released = ola.push(synth.synthesize(frames[t]), static_cast<std::int64_t>(t));
    out.insert(out.end(), released.begin(), released.end());
  }
  out.resize(length, 0.0);
  return out;
}

}  // namespace lowlat
