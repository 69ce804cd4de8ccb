#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "lowlat/framing.hpp"

namespace lowlat {

enum class InverseMode { DirectInverse, Woodbury };

struct BeamformerOptions {
  InverseMode mode = InverseMode::Woodbury;
  /// Diagonal loading: the mixture covariance starts at loading * I.
  double loading = 1e-6;
  /// Exponential forgetting of past statistics; 1.0 accumulates plainly.
  double forgetting = 1.0;
  /// Recompute the filter every `update_stride` frames; statistics still update every frame.
  int update_stride = 1;

  void validate() const;
};

/// Per-frequency weights w(t, f); column f is the P-dimensional filter.
struct BeamformerFilter {
  Eigen::MatrixXcd weights;  // channels x frequencies
  std::int64_t frame_index = 0;
};

/// Running statistics of the frame-online multichannel Wiener filter.
class BeamformerState {
 public:
  BeamformerState(Eigen::Index channels, Eigen::Index frequencies, BeamformerOptions options = {});

  Eigen::Index channels() const { return channels_; }
  Eigen::Index frequencies() const { return static_cast<Eigen::Index>(yy_.size()); }
  const BeamformerOptions& options() const { return options_; }
  std::int64_t frames_seen() const { return frames_seen_; }

  /// Accumulated mixture covariance, including the initial loading.
  const Eigen::MatrixXcd& covariance(Eigen::Index f) const { return yy_[static_cast<std::size_t>(f)]; }
  /// Accumulated sum of Y(t,f) conj(S_hat(t,f)): the reference column of the cross covariance.
  const Eigen::VectorXcd& cross(Eigen::Index f) const { return ys_[static_cast<std::size_t>(f)]; }
  /// Recursively maintained inverse (Woodbury mode only).
  const Eigen::MatrixXcd& inverse(Eigen::Index f) const { return inv_[static_cast<std::size_t>(f)]; }

  /// max |covariance^-1 * covariance - I| at frequency f, in Woodbury mode.
  double inverse_residual(Eigen::Index f) const;

 private:
  friend BeamformerFilter online_update(BeamformerState&, const MultiSpectrumFrame&,
                                        const SpectrumFrame&);

  Eigen::Index channels_;
  BeamformerOptions options_;
  std::vector<Eigen::MatrixXcd> yy_;
  std::vector<Eigen::VectorXcd> ys_;
  std::vector<Eigen::MatrixXcd> inv_;
  BeamformerFilter filter_;
  std::int64_t frames_seen_ = 0;
};

/// Adds Y Y^H and Y conj(S_hat) for every frequency and returns the current filter.
BeamformerFilter online_update(BeamformerState& state, const MultiSpectrumFrame& y,
                               const SpectrumFrame& s_hat);

/// (inv^-1 + y y^H)^-1 from inv via the rank-1 Woodbury identity.
Eigen::MatrixXcd woodbury_update(const Eigen::MatrixXcd& inv, const Eigen::VectorXcd& y);

/// Per frequency, w^H Y.
SpectrumFrame apply_filter(const BeamformerFilter& filter, const MultiSpectrumFrame& y);

struct OfflineMcwfResult {
  BeamformerFilter filter;
  std::vector<SpectrumFrame> output;
};

/// Time-invariant filter w(f) = (loading I + sum_t Y Y^H)^-1 sum_t Y conj(S_hat),
/// applied to every frame.
OfflineMcwfResult offline_mcwf(std::span<const MultiSpectrumFrame> y,
                               std::span<const SpectrumFrame> s_hat, double loading = 1e-6);

}  // namespace lowlat
