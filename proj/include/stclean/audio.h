#pragma once

#include <Eigen/Core>
#include <filesystem>

namespace stclean {

// Mono audio with samples normalized to [-1, 1].
struct AudioBuffer {
  Eigen::VectorXf samples;
  int sample_rate_hz = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

struct TimeWindow {
  double start_s = 0.0;
  double end_s = 0.0;

  double length_s() const { return end_s - start_s; }
  bool operator==(const TimeWindow&) const = default;
};

// A requested window and its intersection with [0, file_duration_s].
struct ClampedWindow {
  TimeWindow requested;
  TimeWindow actual;
  bool clamped = false;
};

struct AudioSegment {
  Eigen::VectorXf samples;
  int sample_rate_hz = 16000;
  double abs_start_s = 0.0;
  TimeWindow requested_window;
  bool clamped = false;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

inline constexpr int kDetectorSampleRate = 16000;

// RIFF/WAVE, mono, PCM16 or IEEE float32 (plain or WAVE_FORMAT_EXTENSIBLE).
AudioBuffer read_wav(const std::filesystem::path& path);

// Duration from the header alone, without decoding samples.
double wav_duration(const std::filesystem::path& path);

// [offset - expand, offset + duration + expand] intersected with
// [0, file_duration_s]. Throws EmptyWindow when nothing is left.
ClampedWindow expand_window(double offset_s, double duration_s, double expand_s,
                            double file_duration_s);

// Start index is floor(start * rate), end index ceil(end * rate), both
// clamped to the buffer; abs_start_s is the time of the first sample.
AudioSegment cut_segment(const AudioBuffer& buf, double offset_s, double duration_s,
                         double expand_s);

// Rejects anything the detector path cannot consume (non-16 kHz).
void require_detector_rate(const AudioBuffer& buf);

}  // namespace stclean
