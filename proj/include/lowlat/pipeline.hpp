#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <vector>

#include "lowlat/beamformer.hpp"
#include "lowlat/estimators.hpp"
#include "lowlat/framing.hpp"
#include "lowlat/report.hpp"

namespace lowlat {

/// Streaming two-stage enhancer: analysis, stage-1 estimate, optional online
/// MCWF, optional stage-2 estimate, dual-window synthesis. The final stage
/// predicts `params.frames_ahead` frames ahead; earlier stages work on the
/// current frame.
class Pipeline {
 public:
  Pipeline(const PipelineConfig& config, std::size_t channels,
           std::unique_ptr<FrameEstimator> stage1, std::unique_ptr<FrameEstimator> stage2 = nullptr);

  /// Returns output samples released by this chunk. Output index n lines up with input index n.
  Signal push(const MultiSignal& chunk);

  /// Feeds silence until every output sample below `length` is released and returns the
  /// newly released samples, stopping at `length`.
  Signal finish(std::int64_t length);

  std::int64_t samples_ingested() const { return analyzer_.samples_ingested(); }
  std::int64_t samples_released() const { return released_; }

  /// Keep final-stage and beamformer frames for offline inspection.
  void set_recording(bool on) { recording_ = on; }
  /// Final-stage estimates in processing order; entry i is the estimate of frame i + frames_ahead.
  const std::vector<SpectrumFrame>& final_frames() const { return final_frames_; }
  const std::vector<SpectrumFrame>& beamformed_frames() const { return beamformed_frames_; }

  const StageFrameCounts& frame_counts() const { return counts_; }
  FrameTiming timing() const;
  const BeamformerState* beamformer() const { return beamformer_ ? &*beamformer_ : nullptr; }
  const PipelineConfig& config() const { return config_; }
  /// Lookahead used by the stage-1 estimator (non-zero only if it is the final stage).
  int stage1_lookahead() const { return stage1_lookahead_; }

 private:
  Signal process(const MultiSpectrumFrame& frame);

  PipelineConfig config_;
  StreamAnalyzer analyzer_;
  FrameSynthesizer synthesizer_;
  OverlapAdder overlap_add_;
  std::unique_ptr<FrameEstimator> stage1_;
  std::unique_ptr<FrameEstimator> stage2_;
  std::optional<BeamformerState> beamformer_;
  int stage1_lookahead_ = 0;
  std::int64_t released_ = 0;
  bool recording_ = false;
  std::vector<SpectrumFrame> final_frames_;
  std::vector<SpectrumFrame> beamformed_frames_;
  StageFrameCounts counts_;
  double total_us_ = 0.0;
  double max_us_ = 0.0;
};

struct RunOptions {
  /// Input is streamed in chunks of this many samples; 0 uses the hop size.
  std::size_t chunk_size = 0;
};

struct RunResult {
  Signal output;
  RunReport report;
};

/// Builds the estimators from the config, streams `mixture` through the pipeline
/// and returns an output of the same length. `reference` (clean target at the
/// reference mic) is required for oracle estimators and enables metrics.
RunResult run_pipeline(const PipelineConfig& config, const MultiSignal& mixture,
                       const std::optional<Signal>& reference = std::nullopt,
                       const RunOptions& options = {});

}  // namespace lowlat
