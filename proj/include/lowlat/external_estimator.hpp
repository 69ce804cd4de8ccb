#pragma once

#include <sys/types.h>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lowlat/estimators.hpp"

namespace lowlat {

/// Child-process estimator speaking a synchronous stdio protocol.
///
/// Handshake (text, parent to child):
///   "LOWLAT-EST 1 n_bins=<F> channels=<P> stage=<s> ref_mic=<q> lookahead=<k>\n"
/// and the child answers "READY\n". Every frame is then one request and one
/// response, each a uint32 value count followed by that many float32 values,
/// all little-endian. Values are interleaved (re, im) per bin, one block of
/// n_bins bins per signal. A request holds the P mixture channels; stage-2
/// requests append the stage-1 estimate and the beamformed frame (zeros when
/// the beamformer is off). The response is one block: the estimate.
class ExternalEstimator final : public FrameEstimator {
 public:
  ExternalEstimator(const std::string& command, std::size_t n_bins, std::size_t channels,
                    int stage, Eigen::Index ref_mic, int lookahead, int timeout_ms);
  ~ExternalEstimator() override;
  ExternalEstimator(const ExternalEstimator&) = delete;
  ExternalEstimator& operator=(const ExternalEstimator&) = delete;

  SpectrumFrame estimate(const EstimatorInput& input, int lookahead) override;
  std::string name() const override { return "external"; }

 private:
  void terminate() noexcept;
  void send_all(const void* data, std::size_t size);
  void recv_all(void* data, std::size_t size);

  std::string command_;
  std::size_t n_bins_;
  std::size_t channels_;
  int stage_;
  int lookahead_;
  int timeout_ms_;
  int fd_ = -1;
  pid_t pid_ = -1;
};

std::string external_handshake(std::size_t n_bins, std::size_t channels, int stage,
                               Eigen::Index ref_mic, int lookahead);

/// Request payload for one frame (without the length prefix).
std::vector<float> encode_external_request(const EstimatorInput& input, int stage);

/// Converts a response payload to a frame; throws ProtocolError on a size mismatch.
SpectrumFrame decode_external_response(std::span<const float> payload, std::size_t n_bins,
                                       std::int64_t frame_index);

}  // namespace lowlat
