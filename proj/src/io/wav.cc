#include "sagasr/io/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "sagasr/io/sgt1.h"

namespace sagasr::io {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void write_header(std::ostream& out, std::uint16_t format, std::uint16_t channels,
                  std::uint32_t rate, std::uint16_t bits, std::uint32_t data_bytes) {
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  out.write("RIFF", 4);
  put_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * block);
  put_u16(out, block);
  put_u16(out, bits);
  out.write("data", 4);
  put_u32(out, data_bytes);
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("wav: cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("wav: not a RIFF/WAVE file: " + path.string());
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) throw std::runtime_error("wav: truncated fmt chunk");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == kFormatExtensible) {
        if (size < 40 || avail < 40) throw std::runtime_error("wav: truncated extensible fmt");
        format = le16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = std::min<std::size_t>(size, avail);
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0 || rate == 0) throw std::runtime_error("wav: missing fmt chunk");
  if (data == nullptr) throw std::runtime_error("wav: missing data chunk");
  if (channels > 2) throw std::runtime_error("wav: only mono and stereo are supported");
  const bool pcm = format == kFormatPcm && (bits == 16 || bits == 24);
  const bool flt = format == kFormatFloat && bits == 32;
  if (!pcm && !flt) {
    throw std::runtime_error("wav: unsupported encoding (format " + std::to_string(format) +
                             ", " + std::to_string(bits) + " bits)");
  }

  const std::size_t bytes_per = bits / 8;
  const std::size_t frames = data_size / (bytes_per * channels);
  AudioBuffer out(channels, frames, static_cast<int>(rate));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (i * channels + c) * bytes_per;
      double v = 0.0;
      if (flt) {
        v = std::bit_cast<float>(le32(p));
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(le16(p)) / 32768.0;
      } else {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      }
      out.channel(c)[i] = v;
    }
  }
  out.validate();
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  audio.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("wav: cannot open " + path.string() + " for writing");
  const auto ch = static_cast<std::uint16_t>(audio.channels());
  const auto n = audio.num_samples();
  write_header(out, kFormatFloat, ch, static_cast<std::uint32_t>(audio.sample_rate()), 32,
               static_cast<std::uint32_t>(n * ch * 4));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < ch; ++c) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(audio.channel(c)[i])));
    }
  }
  if (!out) throw std::runtime_error("wav: write failed: " + path.string());
}

void write_wav_pcm16(const std::filesystem::path& path, const AudioBuffer& audio) {
  audio.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("wav: cannot open " + path.string() + " for writing");
  const auto ch = static_cast<std::uint16_t>(audio.channels());
  const auto n = audio.num_samples();
  write_header(out, kFormatPcm, ch, static_cast<std::uint32_t>(audio.sample_rate()), 16,
               static_cast<std::uint32_t>(n * ch * 2));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < ch; ++c) {
      const double v = std::clamp(audio.channel(c)[i], -1.0, 32767.0 / 32768.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(v * 32768.0))));
    }
  }
  if (!out) throw std::runtime_error("wav: write failed: " + path.string());
}

}  // namespace sagasr::io
