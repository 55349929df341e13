#pragma once

#include <string>
#include <vector>

namespace vdep {

inline constexpr int kSampleRate = 16000;

struct Waveform {
  std::vector<float> samples;  // normalized to [-1, 1]
  int sample_rate = kSampleRate;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads RIFF PCM, mono, 16-bit, 16 kHz. Samples are int16 / 32768.
Waveform decode_wav(const std::string& path);

// Writes 16-bit PCM mono; samples clamped to [-1, 1].
void write_wav16(const std::string& path, const std::vector<float>& samples,
                 int sample_rate = kSampleRate);

}  // namespace vdep
