#pragma once

#include <string>
#include <vector>

#include "lowlat/framing.hpp"
#include "lowlat/windows.hpp"

namespace lowlat {

/// Outcome of streaming probes through the pipeline for one lookahead.
struct LatencyAudit {
  int frames_ahead = 0;
  double expected_ms = 0.0;  ///< ows - k * hop
  double measured_ms = 0.0;  ///< release delay of a hop-aligned impulse
  bool timing_ok = false;    ///< every probed sample released exactly when predicted
  bool impulse_ok = false;   ///< impulses come back at their input position
  bool causal_ok = false;    ///< released output is unaffected by later input
  std::vector<std::string> failures;

  bool passed() const { return timing_ok && impulse_ok && causal_ok; }
};

/// Ingest count at which output sample `n` is released: n - (n mod hop) + latency,
/// but never before the first frame.
std::int64_t predicted_release(std::int64_t n, const FrameParams& params);

/// Probes `params` with frames_ahead replaced by `frames_ahead`.
LatencyAudit audit_latency(const FrameParams& params, const WindowKind& window, int frames_ahead);

}  // namespace lowlat
