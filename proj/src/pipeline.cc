// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsekit/pipeline.h"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dsekit/scene_config.h"
#include "dsekit/segments.h"
#include "dsekit/wav.h"
#include "json.hpp"

namespace dsekit {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base / path;
}

// Path of target as seen from the directory holding anchor.
std::string RelativeTo(const fs::path& target, const fs::path& anchor) {
  const fs::path rel = target.lexically_relative(anchor.parent_path());
  return rel.empty() ? target.generic_string() : rel.generic_string();
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

ordered_json StftToJson(const StftConfig& c) {
  ordered_json j;
  j["sample_rate_hz"] = c.sample_rate;
  j["window_ms"] = c.window_ms;
  j["hop_ms"] = c.hop_ms;
  j["window_samples"] = c.WindowLength();
  j["hop_samples"] = c.HopLength();
  j["fft_size"] = c.FftLength();
  j["window"] = ToString(c.window);
  return j;
}

ordered_json DseToJson(const DseConfig& c) {
  ordered_json j;
  j["distance_m"] = c.distance_m;
  j["speed_of_sound_mps"] = c.speed_of_sound;
  j["hop_s"] = c.hop_s;
  j["epsilon"] = c.epsilon;
  j["diagonal_loading"] = c.diagonal_loading;
  j["order_override"] =
      c.order_override ? ordered_json(*c.order_override) : ordered_json(nullptr);
  j["filter_order"] = c.Order();
  return j;
}

ordered_json DiagnosticsToJson(const DseDiagnostics& d) {
  ordered_json j;
  j["filter_order"] = d.order;
  j["num_frames"] = d.num_frames;
  j["silent_subbands"] = d.silent_subbands;
  j["max_pivot_ratio"] = d.max_pivot_ratio;
  return j;
}

ordered_json FilterToJson(const DseFilter& filter) {
  ordered_json rows = ordered_json::array();
  for (std::size_t f = 0; f < filter.NumBins(); ++f) {
    ordered_json taps = ordered_json::array();
    for (const Complex& h : filter.Taps(f)) taps.push_back({h.real(), h.imag()});
    rows.push_back(std::move(taps));
  }
  return rows;
}

void ProcessRecord(const ManifestRecord& record, const StftConfig& stft,
                   DseConfig dse, RecordStatus& status) {
  if (record.parse_error) throw std::invalid_argument(*record.parse_error);
  const Waveform far = ReadWav(record.far_field_path);
  const Waveform close = ReadWav(record.close_talk_path);
  if (far.sample_rate != stft.sample_rate ||
      close.sample_rate != stft.sample_rate)
    throw std::invalid_argument(
        "sample rate mismatch: far-field " + std::to_string(far.sample_rate) +
        " Hz, close-talk " + std::to_string(close.sample_rate) +
        " Hz, configured " + std::to_string(stft.sample_rate) + " Hz");
  if (far.size() != close.size())
    throw std::invalid_argument(
        "length mismatch: far-field " + std::to_string(far.size()) +
        " samples, close-talk " + std::to_string(close.size()) + " samples");

  const SegmentList segments = SegmentList::Read(record.segments_path);
  const Waveform masked =
      MaskByTimestamps(close, segments, record.speaker_id, &status.warnings);

  dse.hop_s = stft.HopSeconds();
  const DseResult result = DseEstimate(Stft(far, stft), Stft(masked, stft), dse);
  status.diagnostics = result.diagnostics;

  if (record.output_path.has_parent_path())
    fs::create_directories(record.output_path.parent_path());
  WriteWav(record.output_path, Istft(result.estimate), WavFormat::kFloat32);

  ordered_json sidecar;
  sidecar["utterance_id"] = record.utterance_id;
  sidecar["speaker_id"] = record.speaker_id;
  sidecar["far_field"] = RelativeTo(record.far_field_path, record.output_path);
  sidecar["close_talk"] = RelativeTo(record.close_talk_path, record.output_path);
  sidecar["segments"] = RelativeTo(record.segments_path, record.output_path);
  sidecar["stft"] = StftToJson(stft);
  sidecar["dse"] = DseToJson(dse);
  sidecar["diagnostics"] = DiagnosticsToJson(result.diagnostics);
  sidecar["warnings"] = status.warnings;
  WriteText(record.output_path.string() + ".json", sidecar.dump(2) + "\n");
}

template <typename Fn>
void RunParallel(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (workers == 1) {
    loop();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
}

}  // namespace

Manifest Manifest::Parse(const std::string& jsonl, const fs::path& base_dir) {
  Manifest manifest;
  std::set<std::string> seen;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ManifestRecord record;
    record.utterance_id = "line-" + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      record.utterance_id = j.at("utterance_id").get<std::string>();
      record.speaker_id = j.at("speaker_id").get<std::string>();
      for (auto [key, field] :
           {std::pair{"far_field_path", &record.far_field_path},
            std::pair{"close_talk_path", &record.close_talk_path},
            std::pair{"segments_path", &record.segments_path},
            std::pair{"output_path", &record.output_path}}) {
        const auto value = j.at(key).get<std::string>();
        if (value.empty())
          throw std::invalid_argument(std::string(key) + " is empty");
        *field = Resolve(base_dir, value);
      }
      if (j.contains("reference_path"))
        record.reference_path =
            Resolve(base_dir, j.at("reference_path").get<std::string>());
      if (!seen.insert(record.utterance_id).second)
        throw std::invalid_argument("duplicate utterance_id '" +
                                    record.utterance_id + "'");
    } catch (const std::exception& e) {
      record.parse_error =
          "manifest line " + std::to_string(line_no) + ": " + e.what();
    }
    manifest.records.push_back(std::move(record));
  }
  return manifest;
}

Manifest Manifest::Read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open manifest");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str(), path.parent_path());
}

std::string Manifest::ToJsonLines() const {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["utterance_id"] = r.utterance_id;
    j["speaker_id"] = r.speaker_id;
    j["far_field_path"] = r.far_field_path.generic_string();
    j["close_talk_path"] = r.close_talk_path.generic_string();
    j["segments_path"] = r.segments_path.generic_string();
    j["output_path"] = r.output_path.generic_string();
    if (r.reference_path) j["reference_path"] = r.reference_path->generic_string();
    out += j.dump() + "\n";
  }
  return out;
}

std::size_t BatchReport::NumFailed() const {
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.ok ? 0 : 1;
  return failed;
}

std::string BatchReport::ToJson(bool include_timing) const {
  ordered_json j;
  j["num_records"] = records.size();
  j["num_failed"] = NumFailed();
  ordered_json items = ordered_json::array();
  for (const auto& r : records) {
    ordered_json item;
    item["utterance_id"] = r.utterance_id;
    item["status"] = r.ok ? "ok" : "failed";
    if (r.ok) {
      item["diagnostics"] = DiagnosticsToJson(r.diagnostics);
    } else {
      item["error"] = r.error;
    }
    if (!r.warnings.empty()) item["warnings"] = r.warnings;
    if (include_timing) item["elapsed_ms"] = r.elapsed_ms;
    items.push_back(std::move(item));
  }
  j["records"] = std::move(items);
  return j.dump(2) + "\n";
}

BatchReport RunDseBatch(const Manifest& manifest, const StftConfig& stft,
                        const DseConfig& dse, const BatchOptions& options) {
  stft.Validate();
  BatchReport report;
  report.records.resize(manifest.records.size());
  RunParallel(manifest.records.size(), options.workers, [&](std::size_t i) {
    const ManifestRecord& record = manifest.records[i];
    RecordStatus& status = report.records[i];
    status.utterance_id = record.utterance_id;
    const auto start = std::chrono::steady_clock::now();
    try {
      ProcessRecord(record, stft, dse, status);
      status.ok = true;
    } catch (const std::exception& e) {
      status.ok = false;
      status.error = e.what();
    }
    status.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  });
  return report;
}

std::string SpeakerId(std::size_t speaker) {
  return "spk" + std::to_string(speaker);
}

void WriteSceneFiles(const SceneBundle& bundle, const fs::path& out_dir,
                     const std::string& utterance_id) {
  fs::create_directories(out_dir);
  const SceneSpec& spec = bundle.spec;
  auto write = [&](const char* name, const ComplexSpectrogram& s) {
    WriteWav(out_dir / name, Istft(s), WavFormat::kFloat32);
  };
  write(SceneFiles::kFarField, bundle.far_mixture);
  write(SceneFiles::kCloseTalk, bundle.close_talk);
  write(SceneFiles::kDirect, bundle.direct_sound);
  write(SceneFiles::kDrySource, bundle.dry_source);
  write(SceneFiles::kNondirect, bundle.nondirect);
  write(SceneFiles::kInterference, bundle.interference_plus_noise);
  for (std::size_t p = 0; p < bundle.mic_mixtures.size(); ++p)
    WriteWav(out_dir / ("mic_" + std::to_string(p) + ".wav"),
             Istft(bundle.mic_mixtures[p]), WavFormat::kFloat32);

  std::vector<Segment> segments;
  for (std::size_t n = 0; n < bundle.activity.size(); ++n)
    for (const auto& a : bundle.activity[n])
      segments.push_back({SpeakerId(n), a.start_s, a.end_s});
  SegmentList(std::move(segments)).Write(out_dir / SceneFiles::kSegments);

  Manifest manifest;
  ManifestRecord record;
  record.utterance_id = utterance_id;
  record.speaker_id = SpeakerId(spec.target_index);
  record.far_field_path = SceneFiles::kFarField;
  record.close_talk_path = SceneFiles::kCloseTalk;
  record.segments_path = SceneFiles::kSegments;
  record.output_path = SceneFiles::kPseudoLabel;
  record.reference_path = SceneFiles::kDirect;
  manifest.records.push_back(record);
  WriteText(out_dir / SceneFiles::kManifest, manifest.ToJsonLines());
  WriteText(out_dir / SceneFiles::kSceneConfig, FormatSceneDocument(spec));

  ordered_json truth;
  truth["utterance_id"] = utterance_id;
  truth["target_speaker"] = SpeakerId(spec.target_index);
  truth["delay_frames"] = bundle.filters.delay_frames;
  truth["true_order"] = bundle.filters.true_order;
  truth["direct_gain"] = spec.direct_gain[spec.target_index];
  truth["distance_m"] = spec.distance_m[spec.target_index];
  truth["stft"] = StftToJson(spec.stft);
  truth["direct_taps"] = FilterToJson(bundle.filters.direct);
  truth["reverb_taps"] = FilterToJson(bundle.filters.reverb);
  WriteText(out_dir / SceneFiles::kGroundTruth, truth.dump() + "\n");
}

std::vector<EvalRow> EvaluateManifest(const Manifest& manifest,
                                      const EvalOptions& options) {
  std::vector<EvalRow> rows;
  for (const auto& record : manifest.records) {
    EvalRow row;
    row.utterance_id = record.utterance_id;
    try {
      if (record.parse_error) throw std::invalid_argument(*record.parse_error);
      if (!record.reference_path)
        throw std::invalid_argument("record has no reference_path");
      row.metrics = Evaluate(ReadWav(record.output_path),
                             ReadWav(*record.reference_path), options);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string FormatEvalTable(const std::vector<EvalRow>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-24s %12s %10s %10s\n", "utterance",
                "si_sdr_db", "lsd_db", "cosine");
  out += line;
  for (const auto& r : rows) {
    if (r.ok) {
      std::snprintf(line, sizeof(line), "%-24s %12.3f %10.3f %10.5f\n",
                    r.utterance_id.c_str(), r.metrics.si_sdr_db,
                    r.metrics.lsd_db, r.metrics.spectral_cosine);
    } else {
      std::snprintf(line, sizeof(line), "%-24s %12s  ", r.utterance_id.c_str(),
                    "FAILED");
      out += line + r.error + "\n";
      continue;
    }
    out += line;
  }
  return out;
}

std::string EvalRowsToJson(const std::vector<EvalRow>& rows) {
  ordered_json items = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json item;
    item["utterance_id"] = r.utterance_id;
    item["status"] = r.ok ? "ok" : "failed";
    if (r.ok) {
      item["si_sdr_db"] = r.metrics.si_sdr_db;
      item["si_sdr_capped"] = r.metrics.si_sdr_capped;
      item["lsd_db"] = r.metrics.lsd_db;
      item["spectral_cosine"] = r.metrics.spectral_cosine;
    } else {
      item["error"] = r.error;
    }
    items.push_back(std::move(item));
  }
  return items.dump(2) + "\n";
}

}  // namespace dsekit
