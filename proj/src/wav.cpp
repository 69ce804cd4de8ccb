#include "lowlat/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace lowlat {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  void need(std::size_t offset, std::size_t count, const char* what) const {
    if (offset + count > bytes_.size()) {
      throw FormatError(name_ + ": truncated " + what + " at byte offset " +
                        std::to_string(offset) + " (needs " + std::to_string(count) +
                        " bytes, file has " + std::to_string(bytes_.size()) + ")");
    }
  }
  std::uint16_t u16(std::size_t at) const { return static_cast<std::uint16_t>(bytes_[at] | (bytes_[at + 1] << 8)); }
  std::uint32_t u32(std::size_t at) const {
    return static_cast<std::uint32_t>(bytes_[at]) | (static_cast<std::uint32_t>(bytes_[at + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes_[at + 2]) << 16) |
           (static_cast<std::uint32_t>(bytes_[at + 3]) << 24);
  }
  bool tag(std::size_t at, const char* four) const { return std::memcmp(&bytes_[at], four, 4) == 0; }
  const std::uint8_t* data(std::size_t at) const { return bytes_.data() + at; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::string name_;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* four) { out.insert(out.end(), four, four + 4); }

std::int32_t quantize(double v, double scale, std::int32_t lo, std::int32_t hi) {
  const double q = std::round(v * scale);
  if (!(q >= lo)) return lo;  // also maps NaN to lo
  if (q > hi) return hi;
  return static_cast<std::int32_t>(q);
}

}  // namespace

SampleFormat parse_sample_format(std::string_view name) {
  if (name == "pcm16" || name == "16") return SampleFormat::Pcm16;
  if (name == "pcm24" || name == "24") return SampleFormat::Pcm24;
  if (name == "float32" || name == "float" || name == "32f") return SampleFormat::Float32;
  throw ValidationError("unknown sample format '" + std::string(name) +
                        "' (expected pcm16, pcm24 or float32)");
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const ByteReader r(bytes, path.string());

  r.need(0, 12, "RIFF header");
  if (!r.tag(0, "RIFF") || !r.tag(8, "WAVE")) {
    throw FormatError(path.string() + ": not a RIFF/WAVE file (byte offset 0)");
  }

  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  std::uint16_t block_align = 0;
  bool have_fmt = false;
  std::size_t data_at = 0;
  std::size_t data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size() && !have_data) {
    const std::uint32_t size = r.u32(pos + 4);
    const std::size_t body = pos + 8;
    if (r.tag(pos, "fmt ")) {
      r.need(body, 16, "fmt chunk");
      format_tag = r.u16(body);
      channels = r.u16(body + 2);
      rate = r.u32(body + 4);
      block_align = r.u16(body + 12);
      bits = r.u16(body + 14);
      if (format_tag == kFormatExtensible) {
        r.need(body, 26, "extensible fmt chunk");
        format_tag = r.u16(body + 24);
      }
      have_fmt = true;
    } else if (r.tag(pos, "data")) {
      r.need(body, size, "data chunk");
      data_at = body;
      data_size = size;
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw FormatError(path.string() + ": missing fmt chunk");
  if (!have_data) r.need(pos, 8, "chunk header (no data chunk found)");

  SampleFormat format;
  if (format_tag == kFormatPcm && bits == 16) {
    format = SampleFormat::Pcm16;
  } else if (format_tag == kFormatPcm && bits == 24) {
    format = SampleFormat::Pcm24;
  } else if (format_tag == kFormatFloat && bits == 32) {
    format = SampleFormat::Float32;
  } else {
    throw FormatError(path.string() + ": unsupported codec (format tag " +
                      std::to_string(format_tag) + ", " + std::to_string(bits) + " bits)");
  }
  if (channels == 0 || block_align != channels * (bits / 8)) {
    throw FormatError(path.string() + ": inconsistent channel count / block alignment");
  }

  WavData out;
  out.sample_rate = static_cast<int>(rate);
  out.format = format;
  const std::size_t frames = data_size / block_align;
  out.channels.assign(channels, Signal(frames));
  const std::size_t width = bits / 8;
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = data_at + (i * channels + c) * width;
      double v = 0.0;
      switch (format) {
        case SampleFormat::Pcm16:
          v = static_cast<std::int16_t>(r.u16(at)) / 32768.0;
          break;
        case SampleFormat::Pcm24: {
          std::int32_t s = static_cast<std::int32_t>(r.u16(at) | (r.data(at)[2] << 16));
          if (s & 0x800000) s -= 0x1000000;
          v = s / 8388608.0;
          break;
        }
        case SampleFormat::Float32:
          v = std::bit_cast<float>(r.u32(at));
          break;
      }
      out.channels[c][i] = v;
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const MultiSignal& channels, int sample_rate,
               SampleFormat format) {
  if (channels.empty()) throw ValidationError("write_wav: no channels");
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != frames) throw ValidationError("write_wav: channels differ in length");
  }
  if (sample_rate <= 0) throw ValidationError("write_wav: sample rate must be positive");

  const std::uint16_t bits = format == SampleFormat::Pcm16 ? 16 : format == SampleFormat::Pcm24 ? 24 : 32;
  const std::uint16_t tag = format == SampleFormat::Float32 ? kFormatFloat : kFormatPcm;
  const auto n_ch = static_cast<std::uint16_t>(channels.size());
  const auto block = static_cast<std::uint16_t>(n_ch * bits / 8);
  const std::uint64_t data_size = static_cast<std::uint64_t>(frames) * block;
  if (data_size > 0xFFFFFFF0ull) throw ValidationError("write_wav: data exceeds the RIFF size limit");

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, static_cast<std::uint32_t>(36 + data_size));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, n_ch);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, static_cast<std::uint32_t>(data_size));
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : channels) {
      switch (format) {
        case SampleFormat::Pcm16:
          put_u16(out, static_cast<std::uint16_t>(quantize(ch[i], 32768.0, -32768, 32767)));
          break;
        case SampleFormat::Pcm24: {
          const auto s = static_cast<std::uint32_t>(quantize(ch[i], 8388608.0, -8388608, 8388607));
          out.push_back(static_cast<std::uint8_t>(s & 0xFF));
          out.push_back(static_cast<std::uint8_t>((s >> 8) & 0xFF));
          out.push_back(static_cast<std::uint8_t>((s >> 16) & 0xFF));
          break;
        }
        case SampleFormat::Float32:
          put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(ch[i])));
          break;
      }
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace lowlat
