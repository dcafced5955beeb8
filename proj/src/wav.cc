// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsekit/wav.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsekit {

namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T Load(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void Put(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

void PutTag(std::vector<std::uint8_t>& out, const char (&tag)[5]) {
  out.insert(out.end(), tag, tag + 4);
}

[[noreturn]] void Fail(const std::filesystem::path& path,
                       const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

}  // namespace

Waveform ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(path, "cannot open for reading");
  const std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0)
    Fail(path, "not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* samples = nullptr;
  std::size_t sample_bytes = 0;
  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const std::uint8_t* chunk = data.data() + pos;
    const auto size = Load<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = std::min<std::size_t>(size, data.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (available < 16) Fail(path, "truncated fmt chunk");
      format = Load<std::uint16_t>(chunk + 8);
      channels = Load<std::uint16_t>(chunk + 10);
      rate = Load<std::uint32_t>(chunk + 12);
      bits = Load<std::uint16_t>(chunk + 22);
      if (format == kFormatExtensible && available >= 26)
        format = Load<std::uint16_t>(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      samples = chunk + 8;
      sample_bytes = available;
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0) Fail(path, "missing fmt chunk");
  if (!samples) Fail(path, "missing data chunk");
  if (channels != 1)
    Fail(path, "expected mono audio, found " + std::to_string(channels) +
                   " channels");
  if (rate == 0) Fail(path, "sample rate is zero");

  Waveform wave;
  wave.sample_rate = static_cast<double>(rate);
  const std::size_t width = bits / 8;
  if (width == 0) Fail(path, "invalid bit depth");
  const std::size_t count = sample_bytes / width;
  wave.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* p = samples + i * width;
    double v = 0.0;
    if (format == kFormatPcm && bits == 16) {
      v = Load<std::int16_t>(p) / 32768.0;
    } else if (format == kFormatPcm && bits == 24) {
      const std::int32_t raw = static_cast<std::int32_t>(
          (static_cast<std::uint32_t>(p[0]) << 8) |
          (static_cast<std::uint32_t>(p[1]) << 16) |
          (static_cast<std::uint32_t>(p[2]) << 24));
      v = (raw >> 8) / 8388608.0;
    } else if (format == kFormatPcm && bits == 32) {
      v = Load<std::int32_t>(p) / 2147483648.0;
    } else if (format == kFormatFloat && bits == 32) {
      v = Load<float>(p);
    } else if (format == kFormatFloat && bits == 64) {
      v = Load<double>(p);
    } else {
      Fail(path, "unsupported sample format " + std::to_string(format) + "/" +
                     std::to_string(bits) + " bits");
    }
    wave.samples[i] = v;
  }
  wave.Validate();
  return wave;
}

void WriteWav(const std::filesystem::path& path, const Waveform& wave,
              WavFormat format) {
  const double rounded_rate = std::round(wave.sample_rate);
  if (!(rounded_rate > 0.0) || rounded_rate != wave.sample_rate)
    Fail(path, "sample rate must be a positive integer");
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint16_t tag = format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat;
  const auto rate = static_cast<std::uint32_t>(rounded_rate);
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(wave.size() * (bits / 8));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(out, "RIFF");
  Put<std::uint32_t>(out, 36 + data_bytes);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  Put<std::uint32_t>(out, 16);
  Put<std::uint16_t>(out, tag);
  Put<std::uint16_t>(out, 1);
  Put<std::uint32_t>(out, rate);
  Put<std::uint32_t>(out, rate * (bits / 8));
  Put<std::uint16_t>(out, bits / 8);
  Put<std::uint16_t>(out, bits);
  PutTag(out, "data");
  Put<std::uint32_t>(out, data_bytes);
  for (double s : wave.samples) {
    if (format == WavFormat::kPcm16) {
      const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      Put<std::int16_t>(out, static_cast<std::int16_t>(scaled));
    } else {
      Put<float>(out, static_cast<float>(s));
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) Fail(path, "cannot open for writing");
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) Fail(path, "write failed");
}

}  // namespace dsekit
