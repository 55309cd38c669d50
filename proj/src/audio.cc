#include "stclean/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "stclean/corpus.h"
#include "stclean/error.h"

namespace stclean {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct WavLayout {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
};

WavLayout parse_layout(const std::string& bytes, const std::string& name) {
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kCorruptHeader, name + ": not a RIFF/WAVE file");
  }
  WavLayout layout;
  bool have_fmt = false;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const unsigned char* chunk = data + pos;
    const std::uint32_t chunk_size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16 || body + chunk_size > size) {
        throw Error(ErrorCode::kCorruptHeader, name + ": truncated fmt chunk");
      }
      layout.format = le16(data + body);
      layout.channels = le16(data + body + 2);
      layout.sample_rate = le32(data + body + 4);
      layout.bits = le16(data + body + 14);
      if (layout.format == kFormatExtensible) {
        if (chunk_size < 40) throw Error(ErrorCode::kCorruptHeader, name + ": truncated extensible fmt");
        // First two bytes of the SubFormat GUID carry the real format tag.
        layout.format = le16(data + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::kCorruptHeader, name + ": data chunk before fmt");
      layout.data_offset = body;
      // Streamed writers leave 0 or 0xFFFFFFFF; take what is there.
      layout.data_size = std::min<std::size_t>(chunk_size, size - body);
      have_data = true;
      break;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  if (!have_fmt || !have_data) throw Error(ErrorCode::kCorruptHeader, name + ": missing fmt or data chunk");
  if (layout.channels != 1) {
    throw Error(ErrorCode::kUnsupportedFormat, name + ": " + std::to_string(layout.channels) + " channels, expected mono");
  }
  const bool pcm16 = layout.format == kFormatPcm && layout.bits == 16;
  const bool f32 = layout.format == kFormatFloat && layout.bits == 32;
  if (!pcm16 && !f32) {
    throw Error(ErrorCode::kUnsupportedFormat, name + ": format " + std::to_string(layout.format) + " with " +
                                                   std::to_string(layout.bits) + " bits");
  }
  if (layout.sample_rate == 0) throw Error(ErrorCode::kCorruptHeader, name + ": zero sample rate");
  return layout;
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const WavLayout layout = parse_layout(bytes, path.string());
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data()) + layout.data_offset;
  const std::size_t width = layout.bits / 8;
  const std::size_t count = layout.data_size / width;

  AudioBuffer buf;
  buf.sample_rate_hz = static_cast<int>(layout.sample_rate);
  buf.samples.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* p = raw + i * width;
    float value = 0.0f;
    if (layout.format == kFormatPcm) {
      value = static_cast<float>(static_cast<std::int16_t>(le16(p))) / 32768.0f;
    } else {
      const std::uint32_t bits = le32(p);
      std::memcpy(&value, &bits, sizeof(value));
      value = std::clamp(value, -1.0f, 1.0f);
    }
    buf.samples[static_cast<Eigen::Index>(i)] = value;
  }
  return buf;
}

double wav_duration(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const WavLayout layout = parse_layout(bytes, path.string());
  const std::size_t count = layout.data_size / (layout.bits / 8);
  return static_cast<double>(count) / layout.sample_rate;
}

ClampedWindow expand_window(double offset_s, double duration_s, double expand_s,
                            double file_duration_s) {
  if (!(offset_s >= 0.0) || !(duration_s > 0.0) || !(expand_s >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "window needs offset >= 0, duration > 0, expand >= 0");
  }
  ClampedWindow w;
  w.requested = {offset_s - expand_s, offset_s + duration_s + expand_s};
  w.actual = {std::max(0.0, w.requested.start_s), std::min(file_duration_s, w.requested.end_s)};
  if (!(w.actual.end_s > w.actual.start_s)) {
    throw Error(ErrorCode::kEmptyWindow, "window [" + format_double(w.requested.start_s) + ", " +
                                             format_double(w.requested.end_s) + "] lies outside the file");
  }
  w.clamped = !(w.actual == w.requested);
  return w;
}

AudioSegment cut_segment(const AudioBuffer& buf, double offset_s, double duration_s,
                         double expand_s) {
  const ClampedWindow w = expand_window(offset_s, duration_s, expand_s, buf.duration_s());
  const double rate = buf.sample_rate_hz;
  const auto n = static_cast<long long>(buf.samples.size());
  const long long first = std::clamp(static_cast<long long>(std::floor(w.actual.start_s * rate)), 0LL, n);
  const long long last = std::clamp(static_cast<long long>(std::ceil(w.actual.end_s * rate)), first, n);
  if (last == first) throw Error(ErrorCode::kEmptyWindow, "window shorter than one sample");

  AudioSegment seg;
  seg.sample_rate_hz = buf.sample_rate_hz;
  seg.samples = buf.samples.segment(first, last - first);
  seg.abs_start_s = static_cast<double>(first) / rate;
  seg.requested_window = w.requested;
  seg.clamped = w.clamped;
  return seg;
}

void require_detector_rate(const AudioBuffer& buf) {
  if (buf.sample_rate_hz != kDetectorSampleRate) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "sample rate " + std::to_string(buf.sample_rate_hz) + " Hz, expected 16000");
  }
}

}  // namespace stclean
