#pragma once

#include <filesystem>
#include <vector>

#include "lowlat/framing.hpp"

namespace lowlat {

/// Binary single-channel spectrogram used by the FileBacked estimator.
///
/// Layout, little-endian: 8-byte magic "LLSPEC01", uint32 n_bins, uint32 n_frames,
/// then n_frames * n_bins pairs of float32 (re, im), frame-major.
void write_spectrogram(const std::filesystem::path& path, const std::vector<SpectrumFrame>& frames);
std::vector<SpectrumFrame> read_spectrogram(const std::filesystem::path& path);

}  // namespace lowlat
