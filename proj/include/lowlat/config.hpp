#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "lowlat/estimators.hpp"
#include "lowlat/wav.hpp"

namespace lowlat {

/// A length given either as `<key>_ms` or `<key>_samples`.
struct LengthSetting {
  double value = 0.0;
  bool in_ms = true;

  std::size_t samples(int sample_rate, const std::string& key) const;
};

/// Contents of an `enhance` config file. Lengths stay symbolic until the
/// mixture's sample rate is known.
struct EnhanceConfig {
  LengthSetting iws{16.0, true};
  LengthSetting ows{4.0, true};
  LengthSetting hop{2.0, true};
  LengthSetting n_dft{256.0, false};
  PipelineConfig pipeline;  ///< params are filled in by resolve()
  std::filesystem::path mixture;
  std::optional<std::filesystem::path> reference;
  std::filesystem::path output;
  std::optional<std::filesystem::path> report;
  SampleFormat output_format = SampleFormat::Float32;
  std::uint64_t seed = 0;

  /// Pipeline config with frame lengths converted at `sample_rate`.
  PipelineConfig resolve(int sample_rate) const;
};

/// Parses the flat `key = value` format. `#` starts a comment line. Relative
/// paths are taken relative to `base_dir`. Throws ValidationError naming the line and key.
EnhanceConfig parse_enhance_config(const std::string& text,
                                   const std::filesystem::path& base_dir = {});
EnhanceConfig load_enhance_config(const std::filesystem::path& path);

}  // namespace lowlat
