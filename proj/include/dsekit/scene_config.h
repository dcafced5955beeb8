// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Human-readable scene documents: one "key = value" per line, '#' starts a
// comment. Units are part of the key names. Per-speaker keys take a
// comma-separated list or a single value applied to every speaker.
//
//   num_speakers = 2
//   distance_m = 5, 3.5
//   source_kinds = noise_bursts, chirp
//   noise_snr_db = 10
//   leakage_db = -inf

#ifndef DSEKIT_SCENE_CONFIG_H_
#define DSEKIT_SCENE_CONFIG_H_

#include <filesystem>
#include <string>

#include "dsekit/scene.h"

namespace dsekit {

// Unset keys keep SceneSpec defaults. Unknown keys and malformed values throw
// std::invalid_argument naming the offending line.
SceneSpec ParseSceneDocument(const std::string& text);
SceneSpec ReadSceneDocument(const std::filesystem::path& path);

// Writes every field; ParseSceneDocument(FormatSceneDocument(s)) == s.
std::string FormatSceneDocument(const SceneSpec& spec);

}  // namespace dsekit

#endif  // DSEKIT_SCENE_CONFIG_H_
