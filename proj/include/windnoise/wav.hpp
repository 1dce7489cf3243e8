#pragma once

// Minimal RIFF/WAVE reader and writer.
//
// Writes 32-bit IEEE float (default) or 16-bit PCM with TPDF dither; files
// with more than two channels use WAVE_FORMAT_EXTENSIBLE. Reads 8/16/24/32-bit
// PCM and 32/64-bit float, plain or extensible.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "windnoise/buffer.hpp"
#include "windnoise/error.hpp"
#include "windnoise/random.hpp"

namespace windnoise {

enum class SampleFormat { float32, pcm16 };

namespace wav_detail {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;
// Tail of the KSDATAFORMAT_SUBTYPE GUIDs after the 2-byte format code.
constexpr std::array<std::uint8_t, 14> kGuidTail = {0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80,
                                                    0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};

class ByteWriter {
 public:
  void u16(std::uint16_t v) {
    bytes.push_back(static_cast<std::uint8_t>(v));
    bytes.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void tag(const char* t) { bytes.insert(bytes.end(), t, t + 4); }
  std::vector<std::uint8_t> bytes;
};

inline std::uint16_t read_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
inline std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace wav_detail

inline void write_wav(const std::string& path, const MultichannelBuffer& buffer,
                      SampleFormat format = SampleFormat::float32, RngStream dither_stream = {0, 0xD17E4}) {
  using namespace wav_detail;
  buffer.validate();
  const auto channels = static_cast<std::uint16_t>(buffer.num_channels());
  const std::uint16_t bits = format == SampleFormat::float32 ? 32 : 16;
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint64_t frames = buffer.num_samples();
  const std::uint64_t data_bytes = frames * block_align;
  if (buffer.num_channels() > 0xFFFF || data_bytes > 0xFFFFFF00ull - 128) throw IoError("signal too large for a WAV file");
  const auto rate = static_cast<std::uint32_t>(std::lround(buffer.sample_rate_hz));
  const bool extensible = channels > 2;
  const std::uint16_t code = format == SampleFormat::float32 ? kFormatFloat : kFormatPcm;

  ByteWriter h;
  h.tag("RIFF");
  h.u32(0);  // patched below
  h.tag("WAVE");
  h.tag("fmt ");
  if (extensible) {
    h.u32(40);
    h.u16(kFormatExtensible);
  } else {
    h.u32(code == kFormatPcm ? 16 : 18);
    h.u16(code);
  }
  h.u16(channels);
  h.u32(rate);
  h.u32(rate * block_align);
  h.u16(block_align);
  h.u16(bits);
  if (extensible) {
    h.u16(22);
    h.u16(bits);
    h.u32(0);  // no speaker positions: channel c is microphone c
    h.u16(code);
    h.bytes.insert(h.bytes.end(), kGuidTail.begin(), kGuidTail.end());
  } else if (code != kFormatPcm) {
    h.u16(0);
  }
  if (code != kFormatPcm) {
    h.tag("fact");
    h.u32(4);
    h.u32(static_cast<std::uint32_t>(frames));
  }
  h.tag("data");
  h.u32(static_cast<std::uint32_t>(data_bytes));
  const auto riff_size = static_cast<std::uint32_t>(h.bytes.size() - 8 + data_bytes);
  for (int s = 0; s < 4; ++s) h.bytes[4 + static_cast<std::size_t>(s)] = static_cast<std::uint8_t>(riff_size >> (8 * s));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(h.bytes.data()), static_cast<std::streamsize>(h.bytes.size()));

  Rng dither(dither_stream);
  std::vector<std::uint8_t> chunk;
  constexpr std::uint64_t kFramesPerChunk = 4096;
  for (std::uint64_t f0 = 0; f0 < frames; f0 += kFramesPerChunk) {
    const std::uint64_t f1 = std::min(frames, f0 + kFramesPerChunk);
    chunk.clear();
    for (std::uint64_t f = f0; f < f1; ++f) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double v = buffer.channels[c][f];
        if (format == SampleFormat::float32) {
          const float s = static_cast<float>(v);
          std::uint32_t bitsv;
          std::memcpy(&bitsv, &s, 4);
          for (int b = 0; b < 32; b += 8) chunk.push_back(static_cast<std::uint8_t>(bitsv >> b));
        } else {
          const double tpdf = dither.uniform() - dither.uniform();  // +/-1 LSB triangular
          const double q = std::clamp(std::round(v * 32768.0 + tpdf), -32768.0, 32767.0);
          const auto s = static_cast<std::uint16_t>(static_cast<std::int16_t>(q));
          chunk.push_back(static_cast<std::uint8_t>(s));
          chunk.push_back(static_cast<std::uint8_t>(s >> 8));
        }
      }
    }
    out.write(reinterpret_cast<const char*>(chunk.data()), static_cast<std::streamsize>(chunk.size()));
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline MultichannelBuffer read_wav(const std::string& path) {
  using namespace wav_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw IoError("'" + path + "' is not a RIFF/WAVE file");
  }

  std::uint16_t code = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw IoError("truncated fmt chunk in '" + path + "'");
      code = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (code == kFormatExtensible) {
        if (avail < 26) throw IoError("truncated extensible fmt chunk in '" + path + "'");
        code = read_u16(chunk + 32);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = avail;
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0 || data == nullptr) throw IoError("'" + path + "' lacks fmt or data chunk");
  const bool supported = (code == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32)) ||
                         (code == kFormatFloat && (bits == 32 || bits == 64));
  if (!supported) throw IoError("unsupported WAV sample format in '" + path + "'");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frames = data_size / (bytes_per_sample * channels);
  MultichannelBuffer buf;
  buf.sample_rate_hz = rate;
  buf.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + (f * channels + c) * bytes_per_sample;
      double v = 0.0;
      if (code == kFormatFloat && bits == 32) {
        const std::uint32_t u = read_u32(p);
        float s;
        std::memcpy(&s, &u, 4);
        v = s;
      } else if (code == kFormatFloat) {
        std::uint64_t u = 0;
        for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(p[b]) << (8 * b);
        std::memcpy(&v, &u, 8);
      } else if (bits == 8) {
        v = (static_cast<double>(p[0]) - 128.0) / 128.0;
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
      }
      buf.channels[c][f] = v;
    }
  }
  return buf;
}

}  // namespace windnoise
