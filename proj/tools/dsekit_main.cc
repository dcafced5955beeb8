// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// dsekit: simulate scenes, generate direct-sound pseudo-labels, evaluate
// them and compute training losses.
//
// Exit codes: 0 success, 1 usage or input error, 2 some batch records failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dsekit/dse.h"
#include "dsekit/losses.h"
#include "dsekit/metrics.h"
#include "dsekit/pipeline.h"
#include "dsekit/scene.h"
#include "dsekit/scene_config.h"
#include "dsekit/segments.h"
#include "dsekit/spectral.h"
#include "dsekit/wav.h"

namespace fs = std::filesystem;
using namespace dsekit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;

struct StftFlags {
  double sample_rate = 16000.0;
  double window_ms = 25.0;
  double hop_ms = 6.25;
  std::string window = "sqrt_hann";
  CLI::Option* sample_rate_opt = nullptr;
  CLI::Option* window_ms_opt = nullptr;
  CLI::Option* hop_ms_opt = nullptr;
  CLI::Option* window_opt = nullptr;

  void Add(CLI::App* app) {
    sample_rate_opt = app->add_option("--sample-rate", sample_rate,
                                      "Sample rate in Hz")
                          ->capture_default_str();
    window_ms_opt = app->add_option("--stft-window-ms", window_ms,
                                    "STFT window length in ms")
                        ->capture_default_str();
    hop_ms_opt = app->add_option("--stft-hop-ms", hop_ms, "STFT hop in ms")
                     ->capture_default_str();
    window_opt = app->add_option("--stft-window", window,
                                 "Window: sqrt_hann, hann or rectangular")
                     ->capture_default_str();
  }

  StftConfig Config() const {
    StftConfig c;
    c.sample_rate = sample_rate;
    c.window_ms = window_ms;
    c.hop_ms = hop_ms;
    c.window = ParseWindowKind(window);
    c.Validate();
    return c;
  }
};

void WriteOrPrint(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct sound estimation toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Synthesize a reverberant scene with ground truth");
  std::string scene_path, sim_out, sim_utt = "scene";
  std::optional<std::uint64_t> sim_seed;
  StftFlags sim_stft;
  simulate->add_option("--config", scene_path, "Scene document (key = value)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim_seed, "Overrides the document's seed");
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--utterance-id", sim_utt, "Id used in the manifest")
      ->capture_default_str();
  sim_stft.Add(simulate);

  // dse
  auto* dse = app.add_subcommand("dse", "Estimate direct sound pseudo-labels");
  std::string manifest_path, report_path;
  DseConfig dse_cfg;
  std::optional<std::size_t> order;
  std::size_t workers = 1;
  bool timing = false;
  StftFlags dse_stft;
  dse->add_option("--manifest", manifest_path, "Manifest (JSON lines)")
      ->required();
  dse->add_option("--report", report_path, "Report path (default stdout)");
  dse->add_option("--distance-m", dse_cfg.distance_m,
                  "Speaker to far-field array distance")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  dse->add_option("--speed-of-sound", dse_cfg.speed_of_sound, "m/s")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  dse->add_option("--epsilon", dse_cfg.epsilon, "Weight flooring factor")
      ->capture_default_str();
  dse->add_option("--diag-loading", dse_cfg.diagonal_loading,
                  "Relative diagonal loading of the normal equations")
      ->capture_default_str();
  dse->add_option("--order", order, "Override the filter order")
      ->check(CLI::PositiveNumber);
  dse->add_option("--workers", workers, "Records processed concurrently")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  dse->add_flag("--timing", timing, "Include wall-clock times in the report");
  dse_stft.Add(dse);

  // eval
  auto* eval = app.add_subcommand(
      "eval", "Compare estimates with references (SI-SDR, LSD, cosine)");
  std::string est_path, ref_path, eval_manifest, eval_report;
  EvalOptions eval_opts;
  StftFlags eval_stft;
  eval->add_option("--estimate", est_path, "Estimate WAV");
  eval->add_option("--reference", ref_path, "Reference WAV");
  eval->add_option("--manifest", eval_manifest,
                   "Manifest whose records carry reference_path");
  eval->add_option("--report", eval_report, "Write results as JSON");
  eval->add_option("--compress-c", eval_opts.compress_exponent,
                   "Magnitude compression exponent for the cosine")
      ->capture_default_str();
  eval->add_option("--lsd-floor", eval_opts.lsd_floor,
                   "Power floor of the log-spectral distance")
      ->capture_default_str();
  eval_stft.Add(eval);

  // loss
  auto* loss = app.add_subcommand(
      "loss", "MSE / cosine / MCA loss between two WAVs' spectrograms");
  std::string loss_a, loss_b;
  LossConfig loss_cfg;
  double loss_c = 0.3;
  StftFlags loss_stft;
  loss->add_option("--a", loss_a, "Target WAV")->required();
  loss->add_option("--b", loss_b, "Estimate WAV")->required();
  loss->add_option("--alpha", loss_cfg.alpha, "Weight of the cosine term")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  loss->add_option("--compress-c", loss_c, "Magnitude compression exponent")
      ->capture_default_str();
  loss_stft.Add(loss);

  // mask
  auto* mask = app.add_subcommand(
      "mask", "Zero a recording outside a speaker's segments");
  std::string mask_in, mask_segments, mask_speaker, mask_out,
      mask_format = "float32";
  mask->add_option("--input", mask_in, "Input WAV")->required();
  mask->add_option("--segments", mask_segments, "Segments (JSON lines)")
      ->required();
  mask->add_option("--speaker", mask_speaker, "Speaker id")->required();
  mask->add_option("--output", mask_out, "Output WAV")->required();
  mask->add_option("--format", mask_format, "float32 or pcm16")
      ->capture_default_str()
      ->check(CLI::IsMember({"float32", "pcm16"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*simulate) {
      SceneSpec spec = scene_path.empty() ? SceneSpec{}
                                          : ReadSceneDocument(scene_path);
      if (sim_seed) spec.seed = *sim_seed;
      if (sim_stft.sample_rate_opt->count())
        spec.stft.sample_rate = sim_stft.sample_rate;
      if (sim_stft.window_ms_opt->count())
        spec.stft.window_ms = sim_stft.window_ms;
      if (sim_stft.hop_ms_opt->count()) spec.stft.hop_ms = sim_stft.hop_ms;
      if (sim_stft.window_opt->count())
        spec.stft.window = ParseWindowKind(sim_stft.window);
      const SceneBundle bundle = SynthesizeScene(spec);
      WriteSceneFiles(bundle, sim_out, sim_utt);
      std::cout << "wrote scene to " << sim_out << " (target "
                << SpeakerId(spec.target_index) << ", direct delay "
                << bundle.filters.delay_frames << " frames)\n";
      return kExitOk;
    }

    if (*dse) {
      const StftConfig stft = dse_stft.Config();
      dse_cfg.order_override = order;
      dse_cfg.hop_s = stft.HopSeconds();
      dse_cfg.Validate();
      const Manifest manifest = Manifest::Read(manifest_path);
      const BatchReport report =
          RunDseBatch(manifest, stft, dse_cfg, {workers, timing});
      WriteOrPrint(report_path, report.ToJson(timing));
      for (const auto& r : report.records) {
        for (const auto& w : r.warnings)
          std::cerr << "warning: " << r.utterance_id << ": " << w << "\n";
        if (!r.ok) std::cerr << "error: " << r.utterance_id << ": " << r.error << "\n";
      }
      std::cerr << "dse: " << report.records.size() - report.NumFailed() << "/"
                << report.records.size() << " records succeeded (filter order "
                << dse_cfg.Order() << ")\n";
      return report.NumFailed() == 0 ? kExitOk : kExitPartial;
    }

    if (*eval) {
      eval_opts.stft = eval_stft.Config();
      std::vector<EvalRow> rows;
      if (!eval_manifest.empty()) {
        rows = EvaluateManifest(Manifest::Read(eval_manifest), eval_opts);
      } else if (!est_path.empty() && !ref_path.empty()) {
        EvalRow row;
        row.utterance_id = fs::path(est_path).stem().string();
        row.metrics = Evaluate(ReadWav(est_path), ReadWav(ref_path), eval_opts);
        row.ok = true;
        rows.push_back(row);
      } else {
        std::cerr << "eval: pass --manifest or both --estimate and --reference\n\n"
                  << eval->help();
        return kExitUsage;
      }
      std::cout << FormatEvalTable(rows);
      if (!eval_report.empty()) WriteOrPrint(eval_report, EvalRowsToJson(rows));
      for (const auto& r : rows)
        if (!r.ok) return kExitPartial;
      return kExitOk;
    }

    if (*loss) {
      const StftConfig stft = loss_stft.Config();
      const auto a = CompressMagnitude(Stft(ReadWav(loss_a), stft), loss_c);
      const auto b = CompressMagnitude(Stft(ReadWav(loss_b), stft), loss_c);
      std::printf("mse    %.12g\ncossim %.12g\nmca    %.12g\n", MseLoss(a, b),
                  CossimLoss(a, b), McaLoss(a, b, loss_cfg));
      return kExitOk;
    }

    if (*mask) {
      std::vector<std::string> warnings;
      const Waveform out = MaskByTimestamps(
          ReadWav(mask_in), SegmentList::Read(mask_segments), mask_speaker,
          &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      WriteWav(mask_out, out,
               mask_format == "pcm16" ? WavFormat::kPcm16 : WavFormat::kFloat32);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
