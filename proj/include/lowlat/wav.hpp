#pragma once

#include <filesystem>
#include <string_view>

#include "lowlat/types.hpp"

namespace lowlat {

enum class SampleFormat { Pcm16, Pcm24, Float32 };

SampleFormat parse_sample_format(std::string_view name);

struct WavData {
  MultiSignal channels;
  int sample_rate = 0;
  SampleFormat format = SampleFormat::Float32;
};

/// Reads RIFF/WAVE with 16/24-bit PCM or 32-bit float samples (plain or extensible).
/// Integer samples are scaled to [-1, 1).
WavData read_wav(const std::filesystem::path& path);

/// Integer formats round and clip to the representable range.
void write_wav(const std::filesystem::path& path, const MultiSignal& channels, int sample_rate,
               SampleFormat format = SampleFormat::Float32);

}  // namespace lowlat
