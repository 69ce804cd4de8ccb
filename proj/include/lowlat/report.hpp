#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lowlat/estimators.hpp"
#include "lowlat/metrics.hpp"

namespace lowlat {

struct StageFrameCounts {
  std::int64_t analyzed = 0;
  std::int64_t stage1 = 0;
  std::int64_t beamformer = 0;
  std::int64_t stage2 = 0;
  std::int64_t synthesized = 0;
};

/// Wall-clock cost of processing one frame (estimators, beamformer and synthesis).
struct FrameTiming {
  double mean_us = 0.0;
  double max_us = 0.0;
  std::int64_t frames = 0;
};

struct RunReport {
  PipelineConfig config;
  std::size_t channels = 0;
  double algorithmic_latency_ms = 0.0;
  StageFrameCounts frames;
  std::size_t input_samples = 0;
  std::size_t output_samples = 0;
  std::optional<MetricReport> metrics;
  std::optional<double> mixture_si_sdr_db;
  std::optional<double> beamformer_si_sdr_db;
  std::vector<std::string> warnings;
  FrameTiming timing;
};

/// Stable key order. Timing fields are the only non-deterministic part and can be dropped.
std::string report_json(const RunReport& report, bool include_timing = true);

}  // namespace lowlat
