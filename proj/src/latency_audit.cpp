#include "lowlat/latency_audit.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "lowlat/pipeline.hpp"

namespace lowlat {

namespace {

constexpr double kImpulseTolerance = 1e-9;

// Causal stand-in for a predictive estimator: reuses the current frame as its
// guess for frame t + k.
class HoldLastEstimator final : public FrameEstimator {
 public:
  explicit HoldLastEstimator(Eigen::Index channel) : channel_(channel) {}
  SpectrumFrame estimate(const EstimatorInput& input, int lookahead) override {
    auto out = input.mixture.channel(channel_);
    out.frame_index = input.mixture.frame_index + lookahead;
    return out;
  }
  std::string name() const override { return "hold-last"; }

 private:
  Eigen::Index channel_;
};

PipelineConfig probe_config(const FrameParams& params, const WindowKind& window) {
  PipelineConfig c;
  c.params = params;
  c.window = window;
  c.stage1.variant = EstimatorKind::Variant::OracleComplex;
  return c;
}

struct StreamTrace {
  Signal output;
  std::vector<std::int64_t> release_ingest;  // ingest count when each output sample appeared
  std::vector<std::int64_t> released_after;  // released count after each ingest count (index = count)
};

StreamTrace stream_samplewise(Pipeline& pipeline, const MultiSignal& input) {
  StreamTrace trace;
  const std::size_t n = input.front().size();
  trace.released_after.push_back(0);
  MultiSignal one(input.size(), Signal(1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < input.size(); ++p) one[p][0] = input[p][i];
    const auto released = pipeline.push(one);
    trace.output.insert(trace.output.end(), released.begin(), released.end());
    trace.release_ingest.insert(trace.release_ingest.end(), released.size(),
                                static_cast<std::int64_t>(i + 1));
    trace.released_after.push_back(static_cast<std::int64_t>(trace.output.size()));
  }
  return trace;
}

std::string describe(const char* what, std::int64_t n, const std::string& detail) {
  std::ostringstream s;
  s << what << " at n=" << n << ": " << detail;
  return s.str();
}

}  // namespace

std::int64_t predicted_release(std::int64_t n, const FrameParams& params) {
  const auto hop = static_cast<std::int64_t>(params.hop);
  const std::int64_t at = n - n % hop + algorithmic_latency_samples(params);
  return std::max(at, hop);
}

LatencyAudit audit_latency(const FrameParams& base, const WindowKind& window, int frames_ahead) {
  FrameParams params = base;
  params.frames_ahead = frames_ahead;
  params.validate();

  LatencyAudit audit;
  audit.frames_ahead = frames_ahead;
  audit.expected_ms = algorithmic_latency(params);
  audit.timing_ok = true;
  audit.impulse_ok = true;
  audit.causal_ok = true;

  const auto B = static_cast<std::int64_t>(params.hop);
  const auto k = static_cast<std::int64_t>(frames_ahead);
  const auto config = probe_config(params, window);
  const auto g = make_analysis_window(window, params.iws, params.ows);
  const auto L = algorithmic_latency_samples(params);

  // Hop-aligned and mid-hop positions, late enough that their frame is predicted.
  const std::int64_t first = (k + 4) * B;
  const std::vector<std::int64_t> positions{first, first + 1, first + B / 2, first + B - 1,
                                            first + 3 * B};
  bool measured = false;

  for (const std::int64_t n : positions) {
    const auto length = static_cast<std::size_t>(n + static_cast<std::int64_t>(params.iws) + 4 * B);
    Signal impulse(length, 0.0);
    impulse[static_cast<std::size_t>(n)] = 1.0;

    EstimatorContext ctx;
    ctx.params = params;
    ctx.lookahead = frames_ahead;
    ctx.reference = std::make_shared<const std::vector<SpectrumFrame>>(
        analyze_signal(impulse, g, params, frames_to_cover(static_cast<std::int64_t>(length), params)));
    Pipeline pipeline(config, 1, make_estimator(config.stage1, ctx));
    const auto trace = stream_samplewise(pipeline, MultiSignal{impulse});

    if (static_cast<std::int64_t>(trace.output.size()) <= n) {
      audit.timing_ok = false;
      audit.failures.push_back(describe("impulse", n, "never released"));
      continue;
    }
    const std::int64_t got = trace.release_ingest[static_cast<std::size_t>(n)];
    const std::int64_t want = predicted_release(n, params);
    if (got != want) {
      audit.timing_ok = false;
      audit.failures.push_back(describe("impulse", n, "released at ingest " + std::to_string(got) +
                                                          ", expected " + std::to_string(want)));
    }
    if (!measured && n % B == 0) {
      audit.measured_ms = params.samples_to_ms(static_cast<double>(got - n));
      measured = true;
    }
    double worst = 0.0;
    for (std::size_t m = 0; m < trace.output.size(); ++m) {
      const double want_m = static_cast<std::int64_t>(m) == n ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(trace.output[m] - want_m));
    }
    if (worst > kImpulseTolerance) {
      audit.impulse_ok = false;
      audit.failures.push_back(describe("impulse", n, "reconstruction error " + std::to_string(worst)));
    }
  }

  // Causality: cutting the input at n must not change anything released before n arrived.
  std::mt19937_64 rng(0x1a7e5c0ffeeULL + static_cast<std::uint64_t>(frames_ahead));
  std::normal_distribution<double> normal;
  const std::size_t channels = 2;
  const auto length = static_cast<std::size_t>(first + 12 * B + static_cast<std::int64_t>(params.iws));
  MultiSignal noise(channels, Signal(length));
  for (auto& ch : noise) {
    for (auto& x : ch) x = normal(rng);
  }
  auto make_probe = [&]() -> std::unique_ptr<FrameEstimator> {
    if (frames_ahead == 0) {
      EstimatorContext ctx;
      ctx.params = params;
      ctx.channels = channels;
      return make_estimator(EstimatorKind{}, ctx);
    }
    return std::make_unique<HoldLastEstimator>(0);
  };
  Pipeline full_pipeline(config, channels, make_probe());
  const auto full = stream_samplewise(full_pipeline, noise);

  for (const std::int64_t n : positions) {
    MultiSignal cut = noise;
    for (auto& ch : cut) std::fill(ch.begin() + n, ch.end(), 0.0);
    Pipeline cut_pipeline(config, channels, make_probe());
    const auto trace = stream_samplewise(cut_pipeline, cut);

    const std::int64_t released = full.released_after[static_cast<std::size_t>(n)];
    if (released < n - L) {
      audit.causal_ok = false;
      audit.failures.push_back(describe("causality", n, "only " + std::to_string(released) +
                                                            " samples released, expected at least " +
                                                            std::to_string(n - L)));
    }
    for (std::int64_t m = 0; m < released; ++m) {
      if (trace.output[static_cast<std::size_t>(m)] != full.output[static_cast<std::size_t>(m)]) {
        audit.causal_ok = false;
        audit.failures.push_back(describe("causality", n, "output sample " + std::to_string(m) +
                                                              " depends on later input"));
        break;
      }
    }
  }
  return audit;
}

}  // namespace lowlat
