// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Synthetic far-field conversation scenes with a known decomposition.
//
// Scenes are built directly in the STFT domain under the narrowband model:
// every speaker's dry source S_n is filtered per subband by a pure
// delay-and-gain direct path and a random exponentially decaying tail that
// starts one frame after the direct tap. The "separated" far-field signal
// for the target q is
//
//   G = direct_q + nondirect_q + I,
//   I = residual * sum_{n != q} (direct_n + nondirect_n) + noise
//
// and the close-talk signal is S_q plus optional dry cross-talk leakage.

#ifndef DSEKIT_SCENE_H_
#define DSEKIT_SCENE_H_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dsekit/dse.h"
#include "dsekit/spectral.h"

namespace dsekit {

enum class SourceKind { kNoiseBursts, kChirp, kModulatedNoise };

std::string ToString(SourceKind kind);
SourceKind ParseSourceKind(const std::string& name);

struct ReverbSpec {
  std::size_t tail_frames = 16;  // K, total taps including the direct part
  double decay_rate = 0.7;       // per-frame magnitude factor
  double level = 0.5;            // first tail tap relative to the direct gain
  std::uint64_t tap_seed = 1;

  bool operator==(const ReverbSpec&) const = default;
};

struct SceneSpec {
  std::size_t num_speakers = 1;
  std::size_t num_mics = 1;
  std::size_t target_index = 0;
  // Per-speaker entries; each vector holds num_speakers values.
  std::vector<SourceKind> source_kinds{SourceKind::kNoiseBursts};
  std::vector<double> distance_m{5.0};
  std::vector<double> direct_gain{0.5};
  double speed_of_sound = 340.0;
  ReverbSpec reverb;
  double noise_snr_db = std::numeric_limits<double>::infinity();
  double leakage_db = -std::numeric_limits<double>::infinity();
  // Level of the other speakers left in G after separation.
  double residual_interference_db = -10.0;
  // Target occupies even subbands only, interferers odd subbands only.
  bool partition_subbands = false;
  double duration_s = 2.0;
  std::uint64_t seed = 0;
  StftConfig stft;

  void Validate() const;
  std::size_t NumSamples() const;
  // Sources are silent for the first LeadSamples() and the last
  // TrailSamples() samples, so the delayed and reverberant copies of every
  // source fit inside the scene and its spectrograms are those of the
  // written waveforms.
  std::size_t LeadSamples() const;
  std::size_t TrailSamples() const;
  // ceil(D / (a * H)) for the speaker's distance.
  std::size_t DirectDelayFrames(std::size_t speaker) const;

  bool operator==(const SceneSpec&) const = default;
};

struct GroundTruthFilters {
  std::size_t delay_frames = 0;
  std::size_t true_order = 0;  // delay_frames + 1
  DseFilter direct;            // F x true_order
  DseFilter reverb;            // F x tail_frames, zero up to the direct tap
};

struct ActiveInterval {
  double start_s = 0.0;
  double end_s = 0.0;
};

struct SceneBundle {
  ComplexSpectrogram far_mixture;  // G
  ComplexSpectrogram direct_sound;
  ComplexSpectrogram nondirect;
  ComplexSpectrogram interference_plus_noise;
  ComplexSpectrogram close_talk;
  ComplexSpectrogram dry_source;
  std::vector<ComplexSpectrogram> mic_mixtures;  // unseparated, one per mic
  GroundTruthFilters filters;                    // target at mic 0
  std::vector<std::vector<ActiveInterval>> activity;  // per speaker
  SceneSpec spec;
};

SceneBundle SynthesizeScene(const SceneSpec& spec);

// Fraction of bins where both |a|^2 and |b|^2 exceed the threshold.
double WdoOverlapRatio(const ComplexSpectrogram& a, const ComplexSpectrogram& b,
                       double threshold);

}  // namespace dsekit

#endif  // DSEKIT_SCENE_H_
