#include "vdep/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "vdep/common.hpp"
#include "vdep/fileio.hpp"

namespace vdep {

namespace {

uint32_t rd_u32(const std::string& b, size_t off) {
  uint32_t v;
  std::memcpy(&v, b.data() + off, 4);
  return v;
}

uint16_t rd_u16(const std::string& b, size_t off) {
  uint16_t v;
  std::memcpy(&v, b.data() + off, 2);
  return v;
}

void wr_u32(std::string& b, uint32_t v) { b.append(reinterpret_cast<const char*>(&v), 4); }
void wr_u16(std::string& b, uint16_t v) { b.append(reinterpret_cast<const char*>(&v), 2); }

}  // namespace

Waveform decode_wav(const std::string& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0) {
    fail("{}: not a RIFF/WAVE file", path);
  }

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t data_off = 0, data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const uint32_t len = rd_u32(bytes, pos + 4);
    const size_t body = pos + 8;
    if (body + len > bytes.size()) fail("{}: truncated chunk '{}'", path, id);
    if (id == "fmt ") {
      if (len < 16) fail("{}: fmt chunk too short", path);
      format = rd_u16(bytes, body);
      channels = rd_u16(bytes, body + 2);
      rate = rd_u32(bytes, body + 4);
      bits = rd_u16(bytes, body + 14);
      have_fmt = true;
    } else if (id == "data") {
      data_off = body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_off == 0) fail("{}: missing fmt/data chunk", path);
  if (format != 1) fail("{}: unsupported encoding {} (expected PCM)", path, format);
  if (channels != 1) fail("{}: unsupported channel count {} (expected mono)", path, channels);
  if (bits != 16) fail("{}: unsupported bit depth {} (expected 16)", path, bits);
  if (rate != kSampleRate) {
    fail("{}: unsupported sample rate {} (expected {})", path, rate, kSampleRate);
  }
  if (data_len % 2 != 0) fail("{}: truncated sample data", path);

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  const size_t n = data_len / 2;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    int16_t s;
    std::memcpy(&s, bytes.data() + data_off + 2 * i, 2);
    w.samples[i] = static_cast<float>(s) / 32768.0f;
  }
  return w;
}

void write_wav16(const std::string& path, const std::vector<float>& samples,
                 int sample_rate) {
  std::string body;
  body.reserve(44 + samples.size() * 2);
  body += "RIFF";
  wr_u32(body, static_cast<uint32_t>(36 + samples.size() * 2));
  body += "WAVE";
  body += "fmt ";
  wr_u32(body, 16);
  wr_u16(body, 1);  // PCM
  wr_u16(body, 1);  // mono
  wr_u32(body, static_cast<uint32_t>(sample_rate));
  wr_u32(body, static_cast<uint32_t>(sample_rate * 2));  // byte rate
  wr_u16(body, 2);                                       // block align
  wr_u16(body, 16);                                      // bits
  body += "data";
  wr_u32(body, static_cast<uint32_t>(samples.size() * 2));
  for (float x : samples) {
    const float c = std::clamp(x, -1.0f, 1.0f);
    const auto s = static_cast<int16_t>(std::lround(c * 32767.0));
    wr_u16(body, static_cast<uint16_t>(s));
  }
  write_text_atomic(path, body);
}

}  // namespace vdep
