#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nudge/detect.hpp"

namespace nudge {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

WavFrameSource::WavFrameSource(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open wav " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorKind::Input, path.string() + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    const unsigned char* body = bytes.data() + pos + 8;
    if (pos + 8 + size > bytes.size()) {
      throw Error(ErrorKind::Input, path.string() + ": truncated chunk");
    }
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorKind::Input, path.string() + ": short fmt chunk");
      const auto format = read_u16(body);
      const auto channels = read_u16(body + 2);
      sample_rate_ = static_cast<int>(read_u32(body + 4));
      const auto bits = read_u16(body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw Error(ErrorKind::Input,
                    path.string() + ": only mono 16-bit PCM is supported");
      }
      have_fmt = true;
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorKind::Input, path.string() + ": data before fmt");
      pcm_.resize(size / 2);
      for (std::size_t i = 0; i < pcm_.size(); ++i) {
        pcm_[i] = static_cast<std::int16_t>(read_u16(body + 2 * i));
      }
    }
    pos += 8 + size + (size & 1u);
  }
  if (!have_fmt || sample_rate_ <= 0) {
    throw Error(ErrorKind::Input, path.string() + ": missing fmt chunk");
  }
}

std::optional<AudioFrame> WavFrameSource::next_frame() {
  const auto rate = static_cast<std::size_t>(sample_rate_);
  if (cursor_ + rate > pcm_.size()) return std::nullopt;
  AudioFrame frame;
  frame.sample_rate = sample_rate_;
  frame.samples.resize(rate);
  for (std::size_t i = 0; i < rate; ++i) {
    // -32768 maps to -1.0 exactly; the positive side stops at 32767/32768.
    frame.samples[i] = static_cast<float>(pcm_[cursor_ + i]) / 32768.0f;
  }
  cursor_ += rate;
  return frame;
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write wav " + path.string());
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.write("data", 4);
  put_u32(out, data_bytes);
  for (float s : samples) {
    const float clamped = std::clamp(s, -1.0f, 1.0f);
    const auto v = static_cast<std::int16_t>(std::lround(clamped * 32767.0f));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
}

}  // namespace nudge
