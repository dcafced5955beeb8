// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Mono RIFF/WAVE reading and writing. Reads 16/24/32-bit integer PCM and
// 32/64-bit IEEE float; writes 16-bit PCM or 32-bit float.

#ifndef DSEKIT_WAV_H_
#define DSEKIT_WAV_H_

#include <filesystem>

#include "dsekit/spectral.h"

namespace dsekit {

enum class WavFormat { kPcm16, kFloat32 };

Waveform ReadWav(const std::filesystem::path& path);

// 16-bit output is clipped to [-1, 1) after rounding.
void WriteWav(const std::filesystem::path& path, const Waveform& wave,
              WavFormat format = WavFormat::kFloat32);

}  // namespace dsekit

#endif  // DSEKIT_WAV_H_
