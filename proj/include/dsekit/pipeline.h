// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Pseudo-label generation over a manifest of utterances, plus the file
// layout written by the scene simulator.

#ifndef DSEKIT_PIPELINE_H_
#define DSEKIT_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsekit/dse.h"
#include "dsekit/metrics.h"
#include "dsekit/scene.h"
#include "dsekit/spectral.h"

namespace dsekit {

struct ManifestRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::filesystem::path far_field_path;
  std::filesystem::path close_talk_path;
  std::filesystem::path segments_path;
  std::filesystem::path output_path;
  std::optional<std::filesystem::path> reference_path;  // used by eval only
  // Set when the manifest line could not be turned into a record; the batch
  // reports it as failed instead of aborting.
  std::optional<std::string> parse_error;
};

// JSON lines, one record per line. Relative paths are resolved against
// base_dir (the manifest's directory when read from disk).
struct Manifest {
  std::vector<ManifestRecord> records;

  static Manifest Parse(const std::string& jsonl,
                        const std::filesystem::path& base_dir = {});
  static Manifest Read(const std::filesystem::path& path);
  std::string ToJsonLines() const;
};

struct BatchOptions {
  std::size_t workers = 1;
  // Wall-clock timings make reports differ run to run, so they are opt-in.
  bool include_timing = false;
};

struct RecordStatus {
  std::string utterance_id;
  bool ok = false;
  std::string error;
  DseDiagnostics diagnostics;
  std::vector<std::string> warnings;
  double elapsed_ms = 0.0;
};

struct BatchReport {
  std::vector<RecordStatus> records;  // manifest order
  std::size_t NumFailed() const;
  std::string ToJson(bool include_timing) const;
};

// For each record: read both WAVs, mask the close-talk signal to the
// speaker's segments, run DSE in the STFT domain, resynthesize and write a
// 32-bit float WAV to output_path, with a JSON sidecar at output_path.json
// recording the configuration. The DSE hop is taken from the STFT config.
// Failures are confined to their record.
BatchReport RunDseBatch(const Manifest& manifest, const StftConfig& stft,
                        const DseConfig& dse, const BatchOptions& options = {});

// Files written for a simulated scene, relative to its directory.
struct SceneFiles {
  static constexpr const char* kFarField = "far_field.wav";
  static constexpr const char* kCloseTalk = "close_talk.wav";
  static constexpr const char* kDirect = "direct.wav";
  static constexpr const char* kDrySource = "dry_source.wav";
  static constexpr const char* kNondirect = "nondirect.wav";
  static constexpr const char* kInterference = "interference_plus_noise.wav";
  static constexpr const char* kSegments = "segments.jsonl";
  static constexpr const char* kManifest = "manifest.jsonl";
  static constexpr const char* kGroundTruth = "ground_truth.json";
  static constexpr const char* kSceneConfig = "scene.cfg";
  static constexpr const char* kPseudoLabel = "pseudo_label.wav";
};

std::string SpeakerId(std::size_t speaker);

// Resynthesizes every signal of the bundle into out_dir (float WAVs, one per
// far-field mic as mic_<p>.wav), writes the speaker activity as segments,
// a one-record manifest pointing at the pseudo-label location, the scene
// document and a ground-truth sidecar.
void WriteSceneFiles(const SceneBundle& bundle,
                     const std::filesystem::path& out_dir,
                     const std::string& utterance_id = "scene");

struct EvalRow {
  std::string utterance_id;
  bool ok = false;
  std::string error;
  MetricReport metrics;
};

// Compares output_path against reference_path for every record.
std::vector<EvalRow> EvaluateManifest(const Manifest& manifest,
                                      const EvalOptions& options);
std::string FormatEvalTable(const std::vector<EvalRow>& rows);
std::string EvalRowsToJson(const std::vector<EvalRow>& rows);

}  // namespace dsekit

#endif  // DSEKIT_PIPELINE_H_
