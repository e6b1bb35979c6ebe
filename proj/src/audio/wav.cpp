#include "seqemo/audio/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>

namespace seqemo {

namespace {

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& s, uint32_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
  s.push_back(static_cast<char>((v >> 16) & 0xFF));
  s.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

AudioClip read_wav(const std::string& path, const WavReadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(cat("cannot open wav file ", path));
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const uint8_t* p = reinterpret_cast<const uint8_t*>(bytes.data());
  const size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
      std::memcmp(p + 8, "WAVE", 4) != 0)
    throw DataError(cat(path, ": not a RIFF/WAVE file"));

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  uint32_t data_len = 0;

  size_t off = 12;
  while (off + 8 <= n) {
    const uint8_t* chunk = p + off;
    const uint32_t size = read_u32(chunk + 4);
    const size_t body = off + 8;
    if (body + size > n)
      throw DataError(cat(path, ": truncated chunk at offset ", off));
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw DataError(cat(path, ": fmt chunk too short"));
      format = read_u16(p + body);
      channels = read_u16(p + body + 2);
      rate = read_u32(p + body + 4);
      bits = read_u16(p + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = p + body;
      data_len = size;
    }
    off = body + size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr)
    throw DataError(cat(path, ": missing fmt or data chunk"));
  if (format != 1)
    throw DataError(cat(path, ": format tag ", format, " is not PCM"));
  if (channels != 1)
    throw DataError(cat(path, ": ", channels, " channels, expected mono"));
  if (bits != 16)
    throw DataError(cat(path, ": ", bits, " bits per sample, expected 16"));
  if (rate != static_cast<uint32_t>(kSampleRate) && !opts.allow_resample)
    throw DataError(cat(path, ": sample rate ", rate, " Hz, expected ",
                        kSampleRate,
                        " Hz (pass the resample flag to convert)"));

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(data_len / 2);
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    const int16_t s = static_cast<int16_t>(
        static_cast<uint16_t>(data[2 * i] | (data[2 * i + 1] << 8)));
    clip.samples[i] = static_cast<float>(s) / 32768.0f;
  }

  if (clip.sample_rate != kSampleRate) {
    std::cerr << "warning: resampling " << path << " from " << clip.sample_rate
              << " Hz to " << kSampleRate << " Hz (lossy)\n";
    clip = resample_linear(clip, kSampleRate);
  }
  return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
  if (clip.sample_rate != kSampleRate)
    throw DataError(cat("wav writer emits ", kSampleRate, " Hz only, got ",
                        clip.sample_rate));
  const uint32_t data_len = static_cast<uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, kSampleRate);
  put_u32(out, kSampleRate * 2);  // byte rate
  put_u16(out, 2);                // block align
  put_u16(out, 16);               // bits
  out += "data";
  put_u32(out, data_len);
  for (float v : clip.samples) {
    double x = std::lround(static_cast<double>(v) * 32768.0);
    if (x > 32767.0) x = 32767.0;
    if (x < -32768.0) x = -32768.0;
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(x)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(cat("cannot write wav file ", path));
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError(cat("short write to ", path));
}

AudioClip resample_linear(const AudioClip& clip, int target_rate) {
  if (clip.sample_rate == target_rate) return clip;
  AudioClip out;
  out.sample_rate = target_rate;
  const double ratio =
      static_cast<double>(clip.sample_rate) / static_cast<double>(target_rate);
  const size_t n_out = static_cast<size_t>(
      std::floor(static_cast<double>(clip.samples.size()) / ratio));
  out.samples.resize(n_out);
  for (size_t i = 0; i < n_out; ++i) {
    const double pos = i * ratio;
    const size_t i0 = static_cast<size_t>(pos);
    const size_t i1 = std::min(i0 + 1, clip.samples.size() - 1);
    const double frac = pos - static_cast<double>(i0);
    out.samples[i] = static_cast<float>((1.0 - frac) * clip.samples[i0] +
                                        frac * clip.samples[i1]);
  }
  return out;
}

}  // namespace seqemo
