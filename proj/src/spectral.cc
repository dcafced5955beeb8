// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsekit/spectral.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace dsekit {

namespace {

// FFTW plans are created once per size and shared. Planning is not
// thread-safe in FFTW, execution with the new-array interface is.
class FftPlans {
 public:
  struct Pair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
  };

  static const Pair& Get(std::size_t n) {
    static FftPlans instance;
    std::lock_guard<std::mutex> lock(instance.mutex_);
    auto it = instance.plans_.find(n);
    if (it != instance.plans_.end()) return it->second;
    std::vector<double> real(n);
    std::vector<fftw_complex> spec(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Pair pair;
    pair.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(),
                                        spec.data(), flags);
    pair.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec.data(),
                                        real.data(), flags);
    if (!pair.forward || !pair.inverse)
      throw std::runtime_error("FFTW planning failed for size " +
                               std::to_string(n));
    return instance.plans_.emplace(n, pair).first->second;
  }

 private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [n, pair] : plans_) {
      fftw_destroy_plan(pair.forward);
      fftw_destroy_plan(pair.inverse);
    }
  }
  std::mutex mutex_;
  std::map<std::size_t, Pair> plans_;
};

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Reflect about the edge sample (numpy "reflect" mode), folding repeatedly
// for signals shorter than the pad.
double ReflectAt(const std::vector<double>& x, std::ptrdiff_t i) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (n == 1) return x[0];
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  if (i >= n) i = period - i;
  return x[static_cast<std::size_t>(i)];
}

}  // namespace

std::string ToString(WindowKind kind) {
  switch (kind) {
    case WindowKind::kSqrtHann:
      return "sqrt_hann";
    case WindowKind::kHann:
      return "hann";
    case WindowKind::kRectangular:
      return "rectangular";
  }
  return "unknown";
}

WindowKind ParseWindowKind(const std::string& name) {
  if (name == "sqrt_hann" || name == "sqrthann") return WindowKind::kSqrtHann;
  if (name == "hann") return WindowKind::kHann;
  if (name == "rectangular" || name == "rect") return WindowKind::kRectangular;
  throw std::invalid_argument("unknown window kind: " + name);
}

std::size_t StftConfig::WindowLength() const {
  return static_cast<std::size_t>(
      std::max(0.0, std::round(sample_rate * window_ms / 1000.0)));
}

std::size_t StftConfig::HopLength() const {
  return static_cast<std::size_t>(
      std::max(0.0, std::round(sample_rate * hop_ms / 1000.0)));
}

std::size_t StftConfig::FftLength() const {
  return fft_size.value_or(NextPowerOfTwo(WindowLength()));
}

double StftConfig::HopSeconds() const {
  return static_cast<double>(HopLength()) / sample_rate;
}

bool StftConfig::IsCola() const {
  const std::size_t win = WindowLength();
  const std::size_t hop = HopLength();
  if (win == 0 || hop == 0 || hop >= win) return false;
  // Sum of analysis * synthesis windows over all shifts must be flat.
  const auto w = MakeWindow(window, win);
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t n = 0; n < hop; ++n) {
    double acc = 0.0;
    for (std::size_t k = n; k < win; k += hop) acc += w[k] * w[k];
    lo = std::min(lo, acc);
    hi = std::max(hi, acc);
  }
  return lo > 0.0 && (hi - lo) <= 1e-9 * hi;
}

void StftConfig::Validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw std::invalid_argument("stft: sample_rate must be positive");
  const std::size_t win = WindowLength();
  const std::size_t hop = HopLength();
  if (win == 0)
    throw std::invalid_argument("stft: window length rounds to zero samples");
  if (hop == 0)
    throw std::invalid_argument("stft: hop length rounds to zero samples");
  if (hop >= win)
    throw std::invalid_argument(
        "stft: hop (" + std::to_string(hop) +
        " samples) must be shorter than the window (" + std::to_string(win) +
        " samples)");
  if (FftLength() < win)
    throw std::invalid_argument("stft: fft_size smaller than the window");
  if (!IsCola())
    throw std::invalid_argument(
        "stft: " + ToString(window) + " window of " + std::to_string(win) +
        " samples at hop " + std::to_string(hop) +
        " does not satisfy the overlap-add reconstruction condition");
}

std::vector<double> MakeWindow(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::kRectangular) return w;
  for (std::size_t n = 0; n < length; ++n) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                             static_cast<double>(length));
    w[n] = kind == WindowKind::kHann ? hann : std::sqrt(hann);
  }
  return w;
}

void Waveform::Validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw std::invalid_argument("waveform: sample_rate must be positive");
  for (double s : samples)
    if (!std::isfinite(s))
      throw std::invalid_argument("waveform: non-finite sample");
}

ComplexSpectrogram::ComplexSpectrogram(std::size_t num_frames,
                                       const StftConfig& config,
                                       std::size_t num_samples)
    : num_frames_(num_frames),
      num_bins_(config.NumBins()),
      num_samples_(num_samples),
      config_(config),
      values_(num_frames * config.NumBins()) {}

bool ComplexSpectrogram::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(), [](const Complex& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

ComplexSpectrogram& ComplexSpectrogram::operator+=(
    const ComplexSpectrogram& other) {
  if (!SameShape(other))
    throw std::invalid_argument("spectrogram shape mismatch in addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ComplexSpectrogram& ComplexSpectrogram::operator*=(Complex scale) {
  for (auto& v : values_) v *= scale;
  return *this;
}

ComplexSpectrogram operator+(ComplexSpectrogram a,
                             const ComplexSpectrogram& b) {
  a += b;
  return a;
}

MagnitudeSpectrogram::MagnitudeSpectrogram(std::size_t num_frames,
                                           std::size_t num_bins,
                                           double exponent)
    : MagnitudeSpectrogram(num_frames, num_bins,
                           std::vector<double>(num_frames * num_bins),
                           exponent) {}

MagnitudeSpectrogram::MagnitudeSpectrogram(std::size_t num_frames,
                                           std::size_t num_bins,
                                           std::vector<double> values,
                                           double exponent)
    : num_frames_(num_frames),
      num_bins_(num_bins),
      exponent_(exponent),
      values_(std::move(values)) {
  if (values_.size() != num_frames * num_bins)
    throw std::invalid_argument("magnitude spectrogram: value count " +
                                std::to_string(values_.size()) +
                                " does not match shape");
  if (!(exponent > 0.0 && exponent <= 1.0))
    throw std::invalid_argument(
        "magnitude spectrogram: exponent must be in (0, 1]");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(
          "magnitude spectrogram: entries must be finite and nonnegative");
}

std::size_t NumFramesFor(std::size_t num_samples, const StftConfig& config) {
  return 1 + num_samples / config.HopLength();
}

ComplexSpectrogram Stft(const Waveform& wave, const StftConfig& config) {
  config.Validate();
  if (wave.empty()) throw std::invalid_argument("stft: empty waveform");
  if (wave.sample_rate != config.sample_rate)
    throw std::invalid_argument(
        "stft: waveform sample rate " + std::to_string(wave.sample_rate) +
        " Hz does not match configured " + std::to_string(config.sample_rate) +
        " Hz");
  wave.Validate();

  const std::size_t win = config.WindowLength();
  const std::size_t hop = config.HopLength();
  const std::size_t nfft = config.FftLength();
  const auto pad = static_cast<std::ptrdiff_t>(win / 2);
  const auto window = MakeWindow(config.window, win);
  const auto& plans = FftPlans::Get(nfft);

  ComplexSpectrogram spec(NumFramesFor(wave.size(), config), config,
                          wave.size());
  std::vector<double> frame(nfft, 0.0);
  std::vector<fftw_complex> out(nfft / 2 + 1);
  for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
    const auto start = static_cast<std::ptrdiff_t>(t * hop) - pad;
    for (std::size_t n = 0; n < win; ++n)
      frame[n] = window[n] *
                 ReflectAt(wave.samples, start + static_cast<std::ptrdiff_t>(n));
    fftw_execute_dft_r2c(plans.forward, frame.data(), out.data());
    auto row = spec.Frame(t);
    for (std::size_t f = 0; f < row.size(); ++f)
      row[f] = Complex(out[f][0], out[f][1]);
  }
  return spec;
}

Waveform Istft(const ComplexSpectrogram& spec) {
  const StftConfig& config = spec.Config();
  config.Validate();
  const std::size_t win = config.WindowLength();
  const std::size_t hop = config.HopLength();
  const std::size_t nfft = config.FftLength();
  const std::size_t pad = win / 2;
  const auto window = MakeWindow(config.window, win);
  const auto& plans = FftPlans::Get(nfft);
  if (spec.NumFrames() == 0) throw std::invalid_argument("istft: no frames");

  const std::size_t padded_len = (spec.NumFrames() - 1) * hop + win;
  std::vector<double> acc(padded_len, 0.0), norm(padded_len, 0.0);
  std::vector<fftw_complex> in(nfft / 2 + 1);
  std::vector<double> frame(nfft);
  const double scale = 1.0 / static_cast<double>(nfft);
  for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
    auto row = spec.Frame(t);
    for (std::size_t f = 0; f < row.size(); ++f) {
      in[f][0] = row[f].real();
      in[f][1] = row[f].imag();
    }
    // The real-input inverse ignores the imaginary parts of DC and Nyquist.
    fftw_execute_dft_c2r(plans.inverse, in.data(), frame.data());
    const std::size_t start = t * hop;
    for (std::size_t n = 0; n < win; ++n) {
      acc[start + n] += window[n] * frame[n] * scale;
      norm[start + n] += window[n] * window[n];
    }
  }

  Waveform wave;
  wave.sample_rate = config.sample_rate;
  wave.samples.assign(spec.NumSamples(), 0.0);
  for (std::size_t i = 0; i < wave.samples.size(); ++i) {
    const std::size_t j = i + pad;
    if (j < padded_len && norm[j] > 1e-10) wave.samples[i] = acc[j] / norm[j];
  }
  return wave;
}

MagnitudeSpectrogram CompressMagnitude(const ComplexSpectrogram& spec,
                                       double exponent) {
  if (!(exponent > 0.0 && exponent <= 1.0))
    throw std::invalid_argument("compress_magnitude: exponent " +
                                std::to_string(exponent) +
                                " outside (0, 1]");
  std::vector<double> values(spec.Values().size());
  auto in = spec.Values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double mag = std::abs(in[i]);
    values[i] = exponent == 1.0 ? mag : std::pow(mag, exponent);
  }
  return MagnitudeSpectrogram(spec.NumFrames(), spec.NumBins(),
                              std::move(values), exponent);
}

ComplexSpectrogram ApplyMagnitudeMask(const MagnitudeSpectrogram& mask,
                                      const ComplexSpectrogram& spec) {
  if (mask.NumFrames() != spec.NumFrames() || mask.NumBins() != spec.NumBins())
    throw std::invalid_argument(
        "apply_magnitude_mask: mask is " + std::to_string(mask.NumFrames()) +
        "x" + std::to_string(mask.NumBins()) + ", spectrogram is " +
        std::to_string(spec.NumFrames()) + "x" +
        std::to_string(spec.NumBins()));
  ComplexSpectrogram out = spec;
  auto m = mask.Values();
  auto values = out.Values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (m[i] > 1.0)
      throw std::invalid_argument("apply_magnitude_mask: mask value " +
                                  std::to_string(m[i]) + " outside [0, 1]");
    values[i] *= m[i];
  }
  return out;
}

}  // namespace dsekit
