#include "lowlat/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "lowlat/external_estimator.hpp"
#include "lowlat/spectrogram_file.hpp"

namespace lowlat {

namespace {

using Variant = EstimatorKind::Variant;
using Source = EstimatorKind::Source;

SpectrumFrame zero_frame(std::size_t n_bins, std::int64_t index) {
  SpectrumFrame f;
  f.bins.assign(n_bins, Complex(0.0, 0.0));
  f.frame_index = index;
  return f;
}

class PassthroughEstimator final : public FrameEstimator {
 public:
  PassthroughEstimator(Source source, Eigen::Index channel) : source_(source), channel_(channel) {}

  SpectrumFrame estimate(const EstimatorInput& input, int lookahead) override {
    const std::int64_t target = input.mixture.frame_index + lookahead;
    const auto n_bins = static_cast<std::size_t>(input.mixture.frequencies());
    // Future frames have not been observed yet.
    if (lookahead > 0) return zero_frame(n_bins, target);
    SpectrumFrame out;
    switch (source_) {
      case Source::Mixture:
        out = input.mixture.channel(channel_);
        break;
      case Source::Stage1:
        if (input.stage1 == nullptr) throw ValidationError("passthrough:stage1 has no stage-1 input");
        out = *input.stage1;
        break;
      case Source::Beamformed:
        if (input.beamformed == nullptr) {
          throw ValidationError("passthrough:beamformed requires the beamformer");
        }
        out = *input.beamformed;
        break;
    }
    out.frame_index = target;
    return out;
  }

  std::string name() const override { return "passthrough"; }

 private:
  Source source_;
  Eigen::Index channel_;
};

class OracleComplexEstimator final : public FrameEstimator {
 public:
  explicit OracleComplexEstimator(std::shared_ptr<const std::vector<SpectrumFrame>> reference)
      : reference_(std::move(reference)) {}

  SpectrumFrame estimate(const EstimatorInput& input, int lookahead) override {
    const std::int64_t target = input.mixture.frame_index + lookahead;
    if (target < 0 || target >= static_cast<std::int64_t>(reference_->size())) {
      return zero_frame(static_cast<std::size_t>(input.mixture.frequencies()), target);
    }
    auto out = (*reference_)[static_cast<std::size_t>(target)];
    out.frame_index = target;
    return out;
  }

  std::string name() const override { return "oracle-complex"; }

 private:
  std::shared_ptr<const std::vector<SpectrumFrame>> reference_;
};

class OracleMaskEstimator final : public FrameEstimator {
 public:
  OracleMaskEstimator(std::shared_ptr<const std::vector<SpectrumFrame>> reference,
                      Eigen::Index channel)
      : reference_(std::move(reference)), channel_(channel) {}

  SpectrumFrame estimate(const EstimatorInput& input, int lookahead) override {
    const std::int64_t target = input.mixture.frame_index + lookahead;
    const auto n_bins = static_cast<std::size_t>(input.mixture.frequencies());
    if (lookahead > 0 || target >= static_cast<std::int64_t>(reference_->size())) {
      return zero_frame(n_bins, target);
    }
    const auto& clean = (*reference_)[static_cast<std::size_t>(target)];
    SpectrumFrame out;
    out.frame_index = target;
    out.bins.resize(n_bins);
    for (std::size_t f = 0; f < n_bins; ++f) {
      const Complex y = input.mixture.bins(channel_, static_cast<Eigen::Index>(f));
      const double mask = std::clamp(std::abs(clean.bins[f]) / std::max(std::abs(y), kMaskFloor),
                                     0.0, kMaskMax);
      out.bins[f] = mask * y;
    }
    return out;
  }

  std::string name() const override { return "oracle-mask"; }

 private:
  std::shared_ptr<const std::vector<SpectrumFrame>> reference_;
  Eigen::Index channel_;
};

class FileBackedEstimator final : public FrameEstimator {
 public:
  FileBackedEstimator(const std::string& path, const EstimatorContext& ctx)
      : frames_(read_spectrogram(path)) {
    const auto n_bins = ctx.params.bins();
    if (!frames_.empty() && frames_.front().bins.size() != n_bins) {
      throw ValidationError("spectrogram file '" + path + "' has " +
                            std::to_string(frames_.front().bins.size()) + " bins, expected " +
                            std::to_string(n_bins));
    }
    if (ctx.expected_frames >= 0 &&
        static_cast<std::int64_t>(frames_.size()) != ctx.expected_frames) {
      throw ValidationError("spectrogram file '" + path + "' holds " +
                            std::to_string(frames_.size()) + " frames, the run needs " +
                            std::to_string(ctx.expected_frames));
    }
  }

  SpectrumFrame estimate(const EstimatorInput& input, int lookahead) override {
    const std::int64_t target = input.mixture.frame_index + lookahead;
    // Past the end of the file the signal is over; the tail is silent.
    if (target >= static_cast<std::int64_t>(frames_.size())) {
      return zero_frame(static_cast<std::size_t>(input.mixture.frequencies()), target);
    }
    auto out = frames_[static_cast<std::size_t>(target)];
    out.frame_index = target;
    return out;
  }

  std::string name() const override { return "file"; }

 private:
  std::vector<SpectrumFrame> frames_;
};

}  // namespace

EstimatorKind EstimatorKind::parse(std::string_view text) {
  EstimatorKind kind;
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view rest = colon == std::string_view::npos ? "" : text.substr(colon + 1);

  if (head == "passthrough") {
    kind.variant = Variant::Passthrough;
    if (rest.empty() || rest == "mixture") return kind;
    if (rest == "stage1") {
      kind.source = Source::Stage1;
      return kind;
    }
    if (rest == "beamformed") {
      kind.source = Source::Beamformed;
      return kind;
    }
    if (rest.starts_with("mixture:")) {
      const std::string num(rest.substr(8));
      std::size_t used = 0;
      int ch = -1;
      try {
        ch = std::stoi(num, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != num.size() || ch < 0) {
        throw ValidationError("invalid passthrough channel '" + num + "'");
      }
      kind.channel = ch;
      return kind;
    }
    throw ValidationError("unknown passthrough source '" + std::string(rest) + "'");
  }
  if (head == "oracle-complex" && rest.empty()) {
    kind.variant = Variant::OracleComplex;
    return kind;
  }
  if (head == "oracle-mask" && rest.empty()) {
    kind.variant = Variant::OracleMagnitudeMask;
    return kind;
  }
  if (head == "file" && !rest.empty()) {
    kind.variant = Variant::FileBacked;
    kind.path = std::string(rest);
    return kind;
  }
  if (head == "external" && !rest.empty()) {
    kind.variant = Variant::External;
    kind.command = std::string(rest);
    return kind;
  }
  throw ValidationError("unknown estimator '" + std::string(text) +
                        "' (expected passthrough[:...], oracle-complex, oracle-mask, "
                        "file:<path> or external:<command>)");
}

std::string EstimatorKind::describe() const {
  switch (variant) {
    case Variant::Passthrough:
      switch (source) {
        case Source::Mixture:
          return channel < 0 ? "passthrough" : "passthrough:mixture:" + std::to_string(channel);
        case Source::Stage1: return "passthrough:stage1";
        case Source::Beamformed: return "passthrough:beamformed";
      }
      break;
    case Variant::OracleComplex: return "oracle-complex";
    case Variant::OracleMagnitudeMask: return "oracle-mask";
    case Variant::FileBacked: return "file:" + path;
    case Variant::External: return "external:" + command;
  }
  return "unknown";
}

bool PipelineConfig::needs_reference() const {
  return stage1.is_oracle() || (stage2 && stage2->is_oracle());
}

std::vector<std::string> PipelineConfig::validate(std::size_t channels) const {
  std::vector<std::string> warnings;
  params.validate();
  const auto g = make_analysis_window(window, params.iws, params.ows);
  make_synthesis_window(g, params.ows, params.hop);
  beamformer_options.validate();

  if (channels == 0) throw ValidationError("mixture has no channels");
  if (ref_mic < 0 || ref_mic >= static_cast<Eigen::Index>(channels)) {
    throw ValidationError("ref_mic " + std::to_string(ref_mic) + " is outside the " +
                          std::to_string(channels) + " input channels");
  }
  auto check_kind = [&](const EstimatorKind& kind, int stage) {
    if (kind.variant != Variant::Passthrough) return;
    if (kind.channel >= static_cast<int>(channels)) {
      throw ValidationError("stage " + std::to_string(stage) + " passthrough channel " +
                            std::to_string(kind.channel) + " does not exist");
    }
    if (stage == 1 && kind.source != Source::Mixture) {
      throw ValidationError("stage 1 can only pass through the mixture");
    }
    if (kind.source == Source::Beamformed && !beamformer) {
      throw ValidationError("passthrough:beamformed needs beamformer enabled");
    }
  };
  check_kind(stage1, 1);
  if (stage2) check_kind(*stage2, 2);

  if (beamformer && !stage2 && params.frames_ahead > 0) {
    throw ValidationError(
        "frames_ahead > 0 needs an estimator as the final stage; add stage2 after the beamformer");
  }
  if (beamformer && channels == 1) {
    warnings.emplace_back("beamformer on a single channel degenerates to a single-channel Wiener filter");
  }
  return warnings;
}

std::unique_ptr<FrameEstimator> make_estimator(const EstimatorKind& kind,
                                               const EstimatorContext& ctx) {
  const Eigen::Index channel = kind.channel >= 0 ? kind.channel : ctx.ref_mic;
  auto need_reference = [&] {
    if (!ctx.reference) {
      throw ValidationError(kind.describe() + " needs a clean reference signal");
    }
  };
  switch (kind.variant) {
    case Variant::Passthrough:
      return std::make_unique<PassthroughEstimator>(kind.source, channel);
    case Variant::OracleComplex:
      need_reference();
      return std::make_unique<OracleComplexEstimator>(ctx.reference);
    case Variant::OracleMagnitudeMask:
      need_reference();
      return std::make_unique<OracleMaskEstimator>(ctx.reference, ctx.ref_mic);
    case Variant::FileBacked:
      return std::make_unique<FileBackedEstimator>(kind.path, ctx);
    case Variant::External:
      return std::make_unique<ExternalEstimator>(kind.command, ctx.params.bins(), ctx.channels,
                                                 ctx.stage, ctx.ref_mic, ctx.lookahead,
                                                 kind.timeout_ms);
  }
  throw ValidationError("unhandled estimator kind");
}

}  // namespace lowlat
