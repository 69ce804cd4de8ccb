#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "lowlat/dft.hpp"
#include "lowlat/types.hpp"
#include "lowlat/windows.hpp"

namespace lowlat {

/// STFT geometry shared by analysis, synthesis and scheduling.
/// Defaults: 16 kHz, 16 ms input window, 4 ms output window, 2 ms hop, 256-point DFT.
struct FrameParams {
  int sample_rate = 16000;
  std::size_t iws = 256;    ///< analysis (input) window length
  std::size_t ows = 64;     ///< overlap-add (output) window length
  std::size_t hop = 32;
  std::size_t n_dft = 256;
  int frames_ahead = 0;     ///< future frames predicted by the last stage

  /// Throws ValidationError naming the violated rule.
  void validate() const;

  std::size_t bins() const { return n_dft / 2 + 1; }
  double samples_to_ms(double samples) const { return samples * 1000.0 / sample_rate; }

  /// Converts millisecond lengths; each must map to a whole number of samples.
  static FrameParams from_ms(int sample_rate, double iws_ms, double ows_ms, double hop_ms,
                             std::size_t n_dft, int frames_ahead = 0);
};

bool operator==(const FrameParams& a, const FrameParams& b);

struct SpectrumFrame {
  std::vector<Complex> bins;
  std::int64_t frame_index = 0;
};

/// Column f holds Y(t, f) across the P channels.
struct MultiSpectrumFrame {
  Eigen::MatrixXcd bins;  // channels x frequencies
  std::int64_t frame_index = 0;

  Eigen::Index channels() const { return bins.rows(); }
  Eigen::Index frequencies() const { return bins.cols(); }
  SpectrumFrame channel(Eigen::Index p) const;
};

/// Oversize (iws) sliding buffer per channel, primed with iws - hop zeros, emitting
/// one frame per completed hop. Output depends only on the input prefix.
class StreamAnalyzer {
 public:
  StreamAnalyzer(const FrameParams& params, AnalysisWindow window, std::size_t channels);

  /// All channels of `chunk` must have the same length (which may be zero).
  std::vector<MultiSpectrumFrame> push(const MultiSignal& chunk);
  std::vector<MultiSpectrumFrame> push(std::span<const double> mono);

  std::int64_t frames_emitted() const { return frames_emitted_; }
  std::int64_t samples_ingested() const { return samples_ingested_; }
  std::size_t channels() const { return buffers_.size(); }
  const FrameParams& params() const { return params_; }

 private:
  template <typename ChannelAt>
  std::vector<MultiSpectrumFrame> push_impl(std::size_t length, ChannelAt&& channel_at);
  MultiSpectrumFrame emit();

  FrameParams params_;
  AnalysisWindow window_;
  RealDft dft_;
  std::vector<Signal> buffers_;
  std::size_t fill_;
  std::int64_t frames_emitted_ = 0;
  std::int64_t samples_ingested_ = 0;
  std::vector<double> windowed_;
  std::vector<Complex> spectrum_;
};

/// Inverse DFT, keep the last `ows` samples of the first `iws`, apply the synthesis window.
class FrameSynthesizer {
 public:
  FrameSynthesizer(const FrameParams& params, SynthesisWindow window);

  Signal synthesize(const SpectrumFrame& frame);
  const SynthesisWindow& window() const { return window_; }

 private:
  FrameParams params_;
  SynthesisWindow window_;
  RealDft dft_;
  std::vector<double> time_;
};

/// One-shot form of FrameSynthesizer::synthesize.
Signal synthesize_frame(const SpectrumFrame& frame, const SynthesisWindow& l,
                        const FrameParams& params);

/// Frame index at which the chunk computed at frame `t` is overlap-added.
constexpr std::int64_t schedule_frame(std::int64_t t, int frames_ahead) { return t + frames_ahead; }

/// Dual-window overlap-add accumulator.
///
/// The chunk placed at slot s covers output positions [(s+1)B - A, (s+1)B).
/// After placing slot s, every position below (s+2)B - A is final and released.
/// Positions are aligned with input sample indices; negative ones are dropped.
class OverlapAdder {
 public:
  explicit OverlapAdder(const FrameParams& params);

  /// `chunk` is the synthesized output for frame `t`; frames must arrive in order.
  Signal push(std::span<const double> chunk, std::int64_t t);

  /// Output position of the next sample to be released.
  std::int64_t next_position() const { return std::max<std::int64_t>(start_, 0); }
  std::int64_t released() const { return released_; }

 private:
  FrameParams params_;
  std::deque<double> acc_;
  std::int64_t start_;  // output position of acc_.front()
  std::int64_t expected_t_ = 0;
  std::int64_t released_ = 0;
};

/// ows - k * hop, in samples and milliseconds; negative when predicting far enough ahead.
std::int64_t algorithmic_latency_samples(const FrameParams& params);
double algorithmic_latency(const FrameParams& params);

/// Number of frames whose output chunks cover `length` input samples.
std::int64_t frames_to_cover(std::int64_t length, const FrameParams& params);

/// Offline framing through StreamAnalyzer: exactly `n_frames` frames, zero-padding the tail.
std::vector<SpectrumFrame> analyze_signal(std::span<const double> signal,
                                          const AnalysisWindow& window, const FrameParams& params,
                                          std::int64_t n_frames);

/// Synthesizes frames 0, 1, ... in order and overlap-adds them into `length` samples,
/// zero-filling anything the frames do not reach.
Signal overlap_add_frames(std::span<const SpectrumFrame> frames, const SynthesisWindow& l,
                          const FrameParams& params, std::size_t length);

}  // namespace lowlat
