// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsekit/scene.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dsekit {

namespace {

// Independent random streams derived from (seed, tags...).
std::mt19937_64 MakeRng(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(c)};
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kSourceStream = 0x5352;
constexpr std::uint64_t kNoiseStream = 0x4e53;
constexpr std::uint64_t kTapStream = 0x5450;

double DbToAmplitude(double db) {
  if (std::isinf(db) && db < 0) return 0.0;
  return std::pow(10.0, db / 20.0);
}

void NormalizeRms(std::vector<double>& x, std::size_t active_samples) {
  double energy = 0.0;
  for (double v : x) energy += v * v;
  if (energy <= 0.0 || active_samples == 0) return;
  const double gain = std::sqrt(static_cast<double>(active_samples) / energy);
  for (double& v : x) v *= gain;
}

struct Source {
  Waveform wave;
  std::vector<ActiveInterval> activity;
};

// The signal is confined to samples [lead, num_samples - trail); outside it
// the source is silent.
Source MakeSource(SourceKind kind, std::size_t num_samples, std::size_t lead,
                  std::size_t trail, double sample_rate, std::mt19937_64& rng) {
  Source src;
  src.wave.sample_rate = sample_rate;
  src.wave.samples.assign(num_samples, 0.0);
  auto& x = src.wave.samples;
  const std::size_t stop = num_samples - trail;
  const double t0 = static_cast<double>(lead) / sample_rate;
  const double t1 = static_cast<double>(stop) / sample_rate;
  const double duration = t1 - t0;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  switch (kind) {
    case SourceKind::kNoiseBursts: {
      // Alternating bursts (0.25-0.6 s) and gaps (0.08-0.25 s), starting
      // with a burst at the first active sample.
      std::size_t active = 0;
      double t = t0;
      while (t < t1) {
        const double end = std::min(t1, t + 0.25 + 0.35 * uniform(rng));
        const auto i0 = static_cast<std::size_t>(std::round(t * sample_rate));
        const auto i1 = std::min(
            stop, static_cast<std::size_t>(std::round(end * sample_rate)));
        for (std::size_t i = i0; i < i1; ++i) x[i] = normal(rng);
        if (i1 > i0) {
          src.activity.push_back({static_cast<double>(i0) / sample_rate,
                                  static_cast<double>(i1) / sample_rate});
          active += i1 - i0;
        }
        t = end + 0.08 + 0.17 * uniform(rng);
      }
      NormalizeRms(x, active);
      return src;
    }
    case SourceKind::kChirp: {
      const double f0 = 100.0, f1 = 0.45 * sample_rate;
      const double phase = 2.0 * std::numbers::pi * uniform(rng);
      for (std::size_t i = lead; i < stop; ++i) {
        const double t = static_cast<double>(i - lead) / sample_rate;
        x[i] = std::sin(2.0 * std::numbers::pi *
                            (f0 * t + 0.5 * (f1 - f0) * t * t / duration) +
                        phase);
      }
      break;
    }
    case SourceKind::kModulatedNoise: {
      const double rate = 3.0 + 2.0 * uniform(rng);
      const double phase = 2.0 * std::numbers::pi * uniform(rng);
      for (std::size_t i = lead; i < stop; ++i) {
        const double t = static_cast<double>(i - lead) / sample_rate;
        x[i] = normal(rng) *
               (1.0 + 0.8 * std::sin(2.0 * std::numbers::pi * rate * t + phase));
      }
      break;
    }
  }
  NormalizeRms(x, stop - lead);
  src.activity.push_back({t0, t1});
  return src;
}

// out(t, f) += conj(taps_f[l]) * in(t - l, f), zero history.
void AccumulateFiltered(const DseFilter& filter, const ComplexSpectrogram& in,
                        ComplexSpectrogram& out) {
  for (std::size_t f = 0; f < in.NumBins(); ++f) {
    auto taps = filter.Taps(f);
    for (std::size_t l = 0; l < taps.size(); ++l) {
      if (taps[l] == Complex(0.0)) continue;
      const Complex h = std::conj(taps[l]);
      for (std::size_t t = l; t < in.NumFrames(); ++t) out(t, f) += h * in(t - l, f);
    }
  }
}

DseFilter MakeDirectFilter(std::size_t num_bins, std::size_t delay,
                           double gain) {
  DseFilter filter(num_bins, delay + 1);
  for (std::size_t f = 0; f < num_bins; ++f) filter.Taps(f)[delay] = gain;
  return filter;
}

DseFilter MakeTailFilter(std::size_t num_bins, std::size_t delay, double gain,
                         const ReverbSpec& reverb, std::size_t speaker,
                         std::size_t mic) {
  DseFilter filter(num_bins, reverb.tail_frames);
  if (reverb.level == 0.0 || gain == 0.0) return filter;
  auto rng = MakeRng(reverb.tap_seed, kTapStream, speaker, mic);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  for (std::size_t f = 0; f < num_bins; ++f) {
    auto taps = filter.Taps(f);
    for (std::size_t l = delay + 1; l < taps.size(); ++l) {
      const double envelope =
          reverb.level * gain *
          std::pow(reverb.decay_rate, static_cast<double>(l - delay - 1));
      taps[l] = envelope * Complex(normal(rng), normal(rng));
    }
  }
  return filter;
}

double Energy(const ComplexSpectrogram& s) {
  double e = 0.0;
  for (const auto& v : s.Values()) e += std::norm(v);
  return e;
}

}  // namespace

std::string ToString(SourceKind kind) {
  switch (kind) {
    case SourceKind::kNoiseBursts:
      return "noise_bursts";
    case SourceKind::kChirp:
      return "chirp";
    case SourceKind::kModulatedNoise:
      return "modulated_noise";
  }
  return "unknown";
}

SourceKind ParseSourceKind(const std::string& name) {
  if (name == "noise_bursts") return SourceKind::kNoiseBursts;
  if (name == "chirp") return SourceKind::kChirp;
  if (name == "modulated_noise") return SourceKind::kModulatedNoise;
  throw std::invalid_argument("unknown source kind: " + name +
                              " (expected noise_bursts, chirp or "
                              "modulated_noise)");
}

std::size_t SceneSpec::NumSamples() const {
  return static_cast<std::size_t>(
      std::max(0.0, std::round(duration_s * stft.sample_rate)));
}

std::size_t SceneSpec::LeadSamples() const { return stft.WindowLength() / 2; }

std::size_t SceneSpec::TrailSamples() const {
  return reverb.tail_frames * stft.HopLength() + stft.WindowLength();
}

std::size_t SceneSpec::DirectDelayFrames(std::size_t speaker) const {
  return FilterOrder(distance_m.at(speaker), speed_of_sound,
                     stft.HopSeconds()) -
         1;
}

void SceneSpec::Validate() const {
  stft.Validate();
  if (num_speakers == 0) throw std::invalid_argument("scene: need >= 1 speaker");
  if (num_mics == 0) throw std::invalid_argument("scene: need >= 1 mic");
  if (target_index >= num_speakers)
    throw std::invalid_argument("scene: target index out of range");
  if (source_kinds.size() != num_speakers || distance_m.size() != num_speakers ||
      direct_gain.size() != num_speakers)
    throw std::invalid_argument(
        "scene: per-speaker settings must have num_speakers entries");
  if (!(speed_of_sound > 0.0))
    throw std::invalid_argument("scene: speed of sound must be positive");
  for (std::size_t n = 0; n < num_speakers; ++n) {
    if (!(distance_m[n] >= 0.0) || !std::isfinite(distance_m[n]))
      throw std::invalid_argument("scene: distance must be finite and >= 0");
    if (!(direct_gain[n] >= 0.0) || !std::isfinite(direct_gain[n]))
      throw std::invalid_argument("scene: direct gain must be finite and >= 0");
    const std::size_t delay = DirectDelayFrames(n);
    if (reverb.tail_frames <= delay)
      throw std::invalid_argument(
          "scene: reverb tail of " + std::to_string(reverb.tail_frames) +
          " frames must exceed the direct delay of " + std::to_string(delay) +
          " frames (speaker " + std::to_string(n) + ")");
  }
  if (!(reverb.decay_rate >= 0.0 && reverb.decay_rate <= 1.0))
    throw std::invalid_argument("scene: decay rate must be in [0, 1]");
  if (!(reverb.level >= 0.0) || !std::isfinite(reverb.level))
    throw std::invalid_argument("scene: reverb level must be >= 0");
  if (std::isnan(noise_snr_db) || noise_snr_db == -INFINITY)
    throw std::invalid_argument("scene: noise SNR must be a number or +inf");
  if (std::isnan(leakage_db) || leakage_db == INFINITY)
    throw std::invalid_argument("scene: leakage must be a number or -inf");
  if (std::isnan(residual_interference_db) ||
      residual_interference_db == INFINITY)
    throw std::invalid_argument(
        "scene: residual interference must be a number or -inf");
  if (!(duration_s > 0.0) ||
      NumSamples() < LeadSamples() + TrailSamples() + stft.WindowLength())
    throw std::invalid_argument(
        "scene: duration of " + std::to_string(NumSamples()) +
        " samples leaves less than one STFT window between the " +
        std::to_string(LeadSamples()) + "-sample lead-in and the " +
        std::to_string(TrailSamples()) + "-sample tail");
}

SceneBundle SynthesizeScene(const SceneSpec& spec) {
  spec.Validate();
  const std::size_t num_samples = spec.NumSamples();
  const std::size_t num_bins = spec.stft.NumBins();
  const std::size_t q = spec.target_index;

  SceneBundle bundle;
  bundle.spec = spec;

  std::vector<ComplexSpectrogram> dry(spec.num_speakers);
  for (std::size_t n = 0; n < spec.num_speakers; ++n) {
    auto rng = MakeRng(spec.seed, kSourceStream, n, 0);
    Source src = MakeSource(spec.source_kinds[n], num_samples,
                            spec.LeadSamples(), spec.TrailSamples(),
                            spec.stft.sample_rate, rng);
    dry[n] = Stft(src.wave, spec.stft);
    if (spec.partition_subbands) {
      // Even subbands for the target, odd ones for everyone else.
      const std::size_t keep = n == q ? 0 : 1;
      for (std::size_t t = 0; t < dry[n].NumFrames(); ++t)
        for (std::size_t f = 0; f < num_bins; ++f)
          if (f % 2 != keep) dry[n](t, f) = 0.0;
    }
    bundle.activity.push_back(std::move(src.activity));
  }
  const std::size_t num_frames = dry[q].NumFrames();
  const ComplexSpectrogram zero(num_frames, spec.stft, num_samples);

  // reverberant[n][p] = direct_n + nondirect_{n,p}
  std::vector<std::vector<ComplexSpectrogram>> reverberant(spec.num_speakers);
  for (std::size_t n = 0; n < spec.num_speakers; ++n) {
    const std::size_t delay = spec.DirectDelayFrames(n);
    const DseFilter direct =
        MakeDirectFilter(num_bins, delay, spec.direct_gain[n]);
    ComplexSpectrogram direct_sound = zero;
    AccumulateFiltered(direct, dry[n], direct_sound);
    for (std::size_t p = 0; p < spec.num_mics; ++p) {
      const DseFilter tail = MakeTailFilter(num_bins, delay, spec.direct_gain[n],
                                            spec.reverb, n, p);
      ComplexSpectrogram nondirect = zero;
      AccumulateFiltered(tail, dry[n], nondirect);
      if (n == q && p == 0) {
        bundle.direct_sound = direct_sound;
        bundle.nondirect = nondirect;
        bundle.filters.delay_frames = delay;
        bundle.filters.true_order = delay + 1;
        bundle.filters.direct = direct;
        bundle.filters.reverb = tail;
      }
      reverberant[n].push_back(direct_sound + nondirect);
    }
  }

  std::vector<ComplexSpectrogram> noise(spec.num_mics, zero);
  if (std::isfinite(spec.noise_snr_db)) {
    for (std::size_t p = 0; p < spec.num_mics; ++p) {
      auto rng = MakeRng(spec.seed, kNoiseStream, p, 0);
      std::normal_distribution<double> normal(0.0, 1.0);
      Waveform white{std::vector<double>(num_samples), spec.stft.sample_rate};
      for (double& v : white.samples) v = normal(rng);
      noise[p] = Stft(white, spec.stft);
    }
    const double speech_energy = Energy(reverberant[q][0]);
    if (!(speech_energy > 0.0))
      throw std::invalid_argument(
          "scene: cannot calibrate noise SNR against a silent target");
    const double scale = std::sqrt(
        speech_energy /
        (Energy(noise[0]) * std::pow(10.0, spec.noise_snr_db / 10.0)));
    for (auto& v : noise) v *= scale;
  }

  const double residual = DbToAmplitude(spec.residual_interference_db);
  bundle.interference_plus_noise = noise[0];
  for (std::size_t p = 0; p < spec.num_mics; ++p) {
    ComplexSpectrogram mix = noise[p];
    for (std::size_t n = 0; n < spec.num_speakers; ++n) {
      mix += reverberant[n][p];
      if (p == 0 && n != q && residual > 0.0) {
        ComplexSpectrogram leak = reverberant[n][0];
        leak *= residual;
        bundle.interference_plus_noise += leak;
      }
    }
    bundle.mic_mixtures.push_back(std::move(mix));
  }

  bundle.far_mixture = bundle.direct_sound;
  bundle.far_mixture += bundle.nondirect;
  bundle.far_mixture += bundle.interference_plus_noise;

  bundle.dry_source = dry[q];
  bundle.close_talk = dry[q];
  const double leakage = DbToAmplitude(spec.leakage_db);
  if (leakage > 0.0) {
    for (std::size_t n = 0; n < spec.num_speakers; ++n) {
      if (n == q) continue;
      ComplexSpectrogram leak = dry[n];
      leak *= leakage;
      bundle.close_talk += leak;
    }
  }
  return bundle;
}

double WdoOverlapRatio(const ComplexSpectrogram& a, const ComplexSpectrogram& b,
                       double threshold) {
  if (!a.SameShape(b))
    throw std::invalid_argument("wdo_overlap_ratio: shape mismatch");
  auto x = a.Values();
  auto y = b.Values();
  if (x.empty()) throw std::invalid_argument("wdo_overlap_ratio: empty input");
  std::size_t both = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::norm(x[i]) > threshold && std::norm(y[i]) > threshold) ++both;
  return static_cast<double>(both) / static_cast<double>(x.size());
}

}  // namespace dsekit
