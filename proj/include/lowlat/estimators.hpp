#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lowlat/beamformer.hpp"
#include "lowlat/framing.hpp"
#include "lowlat/windows.hpp"

namespace lowlat {

/// What an estimator sees at frame t. Stage-1 estimators get only the mixture;
/// stage-2 estimators additionally get the stage-1 estimate and, when the
/// beamformer is enabled, its output for the same frame.
struct EstimatorInput {
  const MultiSpectrumFrame& mixture;
  const SpectrumFrame* stage1 = nullptr;
  const SpectrumFrame* beamformed = nullptr;
};

/// Frame-online estimator of the target at the reference microphone.
class FrameEstimator {
 public:
  virtual ~FrameEstimator() = default;

  /// Returns the estimate for frame `input.mixture.frame_index + lookahead`.
  /// Only frames up to the current one have been observed.
  virtual SpectrumFrame estimate(const EstimatorInput& input, int lookahead) = 0;
  virtual std::string name() const = 0;
};

struct EstimatorKind {
  enum class Variant { Passthrough, OracleComplex, OracleMagnitudeMask, FileBacked, External };
  /// Input forwarded by Passthrough.
  enum class Source { Mixture, Stage1, Beamformed };

  Variant variant = Variant::Passthrough;
  Source source = Source::Mixture;
  int channel = -1;  ///< Passthrough mixture channel; -1 selects the reference mic
  std::string path;     ///< FileBacked spectrogram file
  std::string command;  ///< External estimator command line (run through /bin/sh)
  int timeout_ms = 5000;

  bool is_oracle() const {
    return variant == Variant::OracleComplex || variant == Variant::OracleMagnitudeMask;
  }

  /// Accepted forms: "passthrough", "passthrough:mixture:<p>", "passthrough:stage1",
  /// "passthrough:beamformed", "oracle-complex", "oracle-mask", "file:<path>",
  /// "external:<command>".
  static EstimatorKind parse(std::string_view text);
  std::string describe() const;
};

struct PipelineConfig {
  FrameParams params;  ///< params.frames_ahead applies to the final estimator only
  WindowKind window = WindowKind::tukey();
  EstimatorKind stage1;
  bool beamformer = false;
  BeamformerOptions beamformer_options;
  std::optional<EstimatorKind> stage2;
  Eigen::Index ref_mic = 0;

  /// Rejects inconsistent configurations before any streaming starts.
  /// Returns warnings for permitted but degenerate setups.
  std::vector<std::string> validate(std::size_t channels) const;
  bool needs_reference() const;
};

/// Ingredients shared by the estimator factory.
struct EstimatorContext {
  FrameParams params;
  std::size_t channels = 1;
  Eigen::Index ref_mic = 0;
  int stage = 1;
  /// Frames ahead this estimator predicts (non-zero only for the final stage).
  int lookahead = 0;
  /// Clean reference at the reference mic, framed exactly like the mixture.
  std::shared_ptr<const std::vector<SpectrumFrame>> reference;
  /// Frames the run will need; FileBacked inputs must hold exactly this many. -1 skips the check.
  std::int64_t expected_frames = -1;
};

std::unique_ptr<FrameEstimator> make_estimator(const EstimatorKind& kind,
                                               const EstimatorContext& context);

/// Magnitude-oracle mask bounds.
inline constexpr double kMaskFloor = 1e-8;
inline constexpr double kMaskMax = 5.0;

}  // namespace lowlat
