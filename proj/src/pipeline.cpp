#include "lowlat/pipeline.hpp"

#include <algorithm>
#include <string>

namespace lowlat {

namespace {

AnalysisWindow analysis_window_for(const PipelineConfig& c) {
  return make_analysis_window(c.window, c.params.iws, c.params.ows);
}

SynthesisWindow synthesis_window_for(const PipelineConfig& c) {
  return make_synthesis_window(analysis_window_for(c), c.params.ows, c.params.hop);
}

int final_stage1_lookahead(const PipelineConfig& c) {
  return c.stage2 || c.beamformer ? 0 : c.params.frames_ahead;
}

}  // namespace

Pipeline::Pipeline(const PipelineConfig& config, std::size_t channels,
                   std::unique_ptr<FrameEstimator> stage1, std::unique_ptr<FrameEstimator> stage2)
    : config_(config),
      analyzer_(config.params, analysis_window_for(config), channels),
      synthesizer_(config.params, synthesis_window_for(config)),
      overlap_add_(config.params),
      stage1_(std::move(stage1)),
      stage2_(std::move(stage2)),
      stage1_lookahead_(final_stage1_lookahead(config)) {
  config_.validate(channels);
  if (!stage1_) throw ValidationError("pipeline needs a stage-1 estimator");
  if (config_.stage2.has_value() != (stage2_ != nullptr)) {
    throw ValidationError("stage-2 estimator presence does not match the configuration");
  }
  if (config_.beamformer) {
    beamformer_.emplace(static_cast<Eigen::Index>(channels),
                        static_cast<Eigen::Index>(config_.params.bins()),
                        config_.beamformer_options);
  }
}

Signal Pipeline::process(const MultiSpectrumFrame& frame) {
  const auto started = std::chrono::steady_clock::now();
  ++counts_.analyzed;

  SpectrumFrame first = stage1_->estimate(EstimatorInput{frame}, stage1_lookahead_);
  ++counts_.stage1;

  std::optional<SpectrumFrame> beamformed;
  if (beamformer_) {
    const auto filter = online_update(*beamformer_, frame, first);
    beamformed = apply_filter(filter, frame);
    ++counts_.beamformer;
    if (recording_) beamformed_frames_.push_back(*beamformed);
  }

  std::optional<SpectrumFrame> second;
  if (stage2_) {
    EstimatorInput input{frame, &first, beamformed ? &*beamformed : nullptr};
    second = stage2_->estimate(input, config_.params.frames_ahead);
    ++counts_.stage2;
  }

  const SpectrumFrame& final_frame = second ? *second : beamformed ? *beamformed : first;
  if (recording_) final_frames_.push_back(final_frame);
  Signal released = overlap_add_.push(synthesizer_.synthesize(final_frame), frame.frame_index);
  ++counts_.synthesized;

  const double us =
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - started).count();
  total_us_ += us;
  max_us_ = std::max(max_us_, us);
  return released;
}

Signal Pipeline::push(const MultiSignal& chunk) {
  Signal out;
  for (const auto& frame : analyzer_.push(chunk)) {
    const auto released = process(frame);
    out.insert(out.end(), released.begin(), released.end());
  }
  released_ += static_cast<std::int64_t>(out.size());
  return out;
}

Signal Pipeline::finish(std::int64_t length) {
  const std::int64_t already = released_;
  Signal out;
  const MultiSignal silence(analyzer_.channels(), Signal(config_.params.hop, 0.0));
  while (released_ < length) {
    const auto released = push(silence);
    out.insert(out.end(), released.begin(), released.end());
  }
  const std::int64_t keep = std::clamp<std::int64_t>(length - already, 0,
                                                     static_cast<std::int64_t>(out.size()));
  out.resize(static_cast<std::size_t>(keep));
  return out;
}

FrameTiming Pipeline::timing() const {
  FrameTiming t;
  t.frames = counts_.synthesized;
  t.mean_us = t.frames > 0 ? total_us_ / static_cast<double>(t.frames) : 0.0;
  t.max_us = max_us_;
  return t;
}

RunResult run_pipeline(const PipelineConfig& config, const MultiSignal& mixture,
                       const std::optional<Signal>& reference, const RunOptions& options) {
  if (mixture.empty()) throw ValidationError("mixture has no channels");
  const std::size_t length = mixture.front().size();
  for (const auto& ch : mixture) {
    if (ch.size() != length) throw ValidationError("mixture channels differ in length");
  }
  const std::size_t channels = mixture.size();

  RunReport report;
  report.warnings = config.validate(channels);
  if (config.needs_reference() && !reference) {
    throw ValidationError("oracle estimators need a clean reference signal");
  }
  if (reference && reference->size() != length) {
    throw ValidationError("reference has " + std::to_string(reference->size()) +
                          " samples, mixture " + std::to_string(length));
  }

  const auto& params = config.params;
  const auto g = analysis_window_for(config);
  const auto l = make_synthesis_window(g, params.ows, params.hop);
  const std::int64_t cover = frames_to_cover(static_cast<std::int64_t>(length), params);

  std::shared_ptr<const std::vector<SpectrumFrame>> reference_frames;
  if (reference) {
    reference_frames =
        std::make_shared<const std::vector<SpectrumFrame>>(analyze_signal(*reference, g, params, cover));
  }

  EstimatorContext ctx;
  ctx.params = params;
  ctx.channels = channels;
  ctx.ref_mic = config.ref_mic;
  ctx.reference = reference_frames;
  ctx.expected_frames = cover;

  ctx.stage = 1;
  ctx.lookahead = final_stage1_lookahead(config);
  auto stage1 = make_estimator(config.stage1, ctx);
  std::unique_ptr<FrameEstimator> stage2;
  if (config.stage2) {
    ctx.stage = 2;
    ctx.lookahead = params.frames_ahead;
    stage2 = make_estimator(*config.stage2, ctx);
  }

  Pipeline pipeline(config, channels, std::move(stage1), std::move(stage2));
  pipeline.set_recording(reference.has_value());

  const std::size_t chunk = options.chunk_size > 0 ? options.chunk_size : params.hop;
  Signal output;
  output.reserve(length + params.ows);
  MultiSignal piece(channels);
  for (std::size_t start = 0; start < length; start += chunk) {
    const std::size_t n = std::min(chunk, length - start);
    for (std::size_t p = 0; p < channels; ++p) {
      piece[p].assign(mixture[p].begin() + static_cast<std::ptrdiff_t>(start),
                      mixture[p].begin() + static_cast<std::ptrdiff_t>(start + n));
    }
    const auto released = pipeline.push(piece);
    output.insert(output.end(), released.begin(), released.end());
  }
  const auto tail = pipeline.finish(static_cast<std::int64_t>(length));
  output.insert(output.end(), tail.begin(), tail.end());
  output.resize(length);

  report.config = config;
  report.channels = channels;
  report.algorithmic_latency_ms = algorithmic_latency(params);
  report.frames = pipeline.frame_counts();
  report.input_samples = length;
  report.output_samples = output.size();
  report.timing = pipeline.timing();

  if (reference) {
    MetricReport m;
    m.samples = length;
    m.si_sdr_db = si_sdr(output, *reference);

    // Final estimate i targets frame i + k; compare where the reference frame exists.
    const auto k = static_cast<std::size_t>(params.frames_ahead);
    const auto& est = pipeline.final_frames();
    std::vector<SpectrumFrame> lhs;
    std::vector<SpectrumFrame> rhs;
    for (std::size_t i = 0; i < est.size() && i + k < reference_frames->size(); ++i) {
      lhs.push_back(est[i]);
      rhs.push_back((*reference_frames)[i + k]);
    }
    m.frames = lhs.size();
    m.ri_mag_loss.sum = ri_mag_loss(lhs, rhs);
    const std::size_t ri_terms = 3 * lhs.size() * params.bins();
    m.ri_mag_loss.mean = ri_terms > 0 ? m.ri_mag_loss.sum / static_cast<double>(ri_terms) : 0.0;

    const auto loss_stft = LossStft::for_rate(params.sample_rate);
    m.wav_mag_loss.sum = wav_mag_loss(output, *reference, loss_stft);
    m.wav_mag_loss.mean =
        m.wav_mag_loss.sum / static_cast<double>(wav_mag_loss_elements(length, loss_stft));
    report.metrics = m;

    report.mixture_si_sdr_db = si_sdr(mixture[static_cast<std::size_t>(config.ref_mic)], *reference);
    if (config.beamformer) {
      FrameParams current = params;
      current.frames_ahead = 0;
      const auto bf = overlap_add_frames(pipeline.beamformed_frames(), l, current, length);
      report.beamformer_si_sdr_db = si_sdr(bf, *reference);
    }
  }
  return RunResult{std::move(output), std::move(report)};
}

}  // namespace lowlat
