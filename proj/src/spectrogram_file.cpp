#include "lowlat/spectrogram_file.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace lowlat {

namespace {

constexpr char kMagic[8] = {'L', 'L', 'S', 'P', 'E', 'C', '0', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

}  // namespace

void write_spectrogram(const std::filesystem::path& path, const std::vector<SpectrumFrame>& frames) {
  const std::size_t n_bins = frames.empty() ? 0 : frames.front().bins.size();
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(n_bins));
  put_u32(out, static_cast<std::uint32_t>(frames.size()));
  for (const auto& f : frames) {
    if (f.bins.size() != n_bins) throw ValidationError("write_spectrogram: ragged frames");
    for (const auto& b : f.bins) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(b.real())));
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(b.imag())));
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path.string() + "'");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::vector<SpectrumFrame> read_spectrogram(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FormatError("cannot open spectrogram '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError(path.string() + ": not a spectrogram file (bad magic at byte offset 0)");
  }
  const std::size_t n_bins = get_u32(bytes, 8);
  const std::size_t n_frames = get_u32(bytes, 12);
  const std::size_t expected = 16 + n_bins * n_frames * 8;
  if (bytes.size() != expected) {
    throw FormatError(path.string() + ": expected " + std::to_string(expected) +
                      " bytes for " + std::to_string(n_frames) + " frames of " +
                      std::to_string(n_bins) + " bins, found " + std::to_string(bytes.size()));
  }
  std::vector<SpectrumFrame> frames(n_frames);
  std::size_t at = 16;
  for (std::size_t t = 0; t < n_frames; ++t) {
    frames[t].frame_index = static_cast<std::int64_t>(t);
    frames[t].bins.resize(n_bins);
    for (auto& b : frames[t].bins) {
      const float re = std::bit_cast<float>(get_u32(bytes, at));
      const float im = std::bit_cast<float>(get_u32(bytes, at + 4));
      b = Complex(re, im);
      at += 8;
    }
  }
  return frames;
}

}  // namespace lowlat
