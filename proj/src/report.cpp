#include "lowlat/report.hpp"

#include "json.hpp"

namespace lowlat {

namespace {

using nlohmann::json;

const char* mode_name(InverseMode m) { return m == InverseMode::Woodbury ? "woodbury" : "direct"; }

json config_json(const PipelineConfig& c) {
  json j;
  j["sample_rate"] = c.params.sample_rate;
  j["iws_samples"] = c.params.iws;
  j["ows_samples"] = c.params.ows;
  j["hop_samples"] = c.params.hop;
  j["n_dft"] = c.params.n_dft;
  j["frames_ahead"] = c.params.frames_ahead;
  j["window"] = c.window.name();
  if (c.window.variant == WindowKind::Variant::Tukey) j["tukey_alpha"] = c.window.tukey_alpha;
  j["stage1"] = c.stage1.describe();
  j["stage2"] = c.stage2 ? json(c.stage2->describe()) : json(nullptr);
  j["ref_mic"] = c.ref_mic;
  if (c.beamformer) {
    j["beamformer"] = {{"mode", mode_name(c.beamformer_options.mode)},
                       {"loading", c.beamformer_options.loading},
                       {"forgetting", c.beamformer_options.forgetting},
                       {"update_stride", c.beamformer_options.update_stride}};
  } else {
    j["beamformer"] = nullptr;
  }
  return j;
}

}  // namespace

std::string report_json(const RunReport& r, bool include_timing) {
  json j;
  j["config"] = config_json(r.config);
  j["channels"] = r.channels;
  j["algorithmic_latency_ms"] = r.algorithmic_latency_ms;
  j["frames"] = {{"analyzed", r.frames.analyzed},
                 {"stage1", r.frames.stage1},
                 {"beamformer", r.frames.beamformer},
                 {"stage2", r.frames.stage2},
                 {"synthesized", r.frames.synthesized}};
  j["input_samples"] = r.input_samples;
  j["output_samples"] = r.output_samples;
  j["warnings"] = r.warnings;
  if (r.metrics) {
    const auto& m = *r.metrics;
    j["metrics"] = {
        {"si_sdr_db", m.si_sdr_db},
        {"ri_mag_loss", {{"sum", m.ri_mag_loss.sum}, {"mean_per_term", m.ri_mag_loss.mean}}},
        {"wav_mag_loss", {{"sum", m.wav_mag_loss.sum}, {"mean_per_term", m.wav_mag_loss.mean}}},
        {"samples", m.samples},
        {"frames", m.frames},
        {"offset", m.offset},
    };
  } else {
    j["metrics"] = nullptr;
  }
  j["mixture_si_sdr_db"] = r.mixture_si_sdr_db ? json(*r.mixture_si_sdr_db) : json(nullptr);
  j["beamformer_si_sdr_db"] = r.beamformer_si_sdr_db ? json(*r.beamformer_si_sdr_db) : json(nullptr);
  if (include_timing) {
    j["timing"] = {{"frames", r.timing.frames},
                   {"mean_frame_us", r.timing.mean_us},
                   {"max_frame_us", r.timing.max_us}};
  }
  return j.dump(2) + "\n";
}

}  // namespace lowlat
