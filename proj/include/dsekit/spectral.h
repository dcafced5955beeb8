// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DSEKIT_SPECTRAL_H_
#define DSEKIT_SPECTRAL_H_

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsekit {

using Complex = std::complex<double>;

enum class WindowKind { kSqrtHann, kHann, kRectangular };

std::string ToString(WindowKind kind);
WindowKind ParseWindowKind(const std::string& name);

// Framing parameters. Lengths are derived from the millisecond values at
// the configured sample rate; the same window is used for analysis and
// synthesis.
struct StftConfig {
  double sample_rate = 16000.0;
  double window_ms = 25.0;
  double hop_ms = 6.25;
  std::optional<std::size_t> fft_size;  // default: next power of two
  WindowKind window = WindowKind::kSqrtHann;

  std::size_t WindowLength() const;
  std::size_t HopLength() const;
  std::size_t FftLength() const;
  std::size_t NumBins() const { return FftLength() / 2 + 1; }
  // Hop in seconds, measured from the integer hop length.
  double HopSeconds() const;

  // Throws std::invalid_argument on a malformed config, including window
  // and hop combinations that violate the overlap-add condition.
  void Validate() const;
  bool IsCola() const;

  bool operator==(const StftConfig&) const = default;
};

// Periodic window of the configured kind and length.
std::vector<double> MakeWindow(WindowKind kind, std::size_t length);

struct Waveform {
  std::vector<double> samples;
  double sample_rate = 16000.0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  // Throws if sample_rate <= 0 or any sample is non-finite.
  void Validate() const;
};

// T x F one-sided complex spectrogram, row-major by frame.
class ComplexSpectrogram {
 public:
  ComplexSpectrogram() = default;
  ComplexSpectrogram(std::size_t num_frames, const StftConfig& config,
                     std::size_t num_samples);

  std::size_t NumFrames() const { return num_frames_; }
  std::size_t NumBins() const { return num_bins_; }
  // Length of the time signal this spectrogram describes.
  std::size_t NumSamples() const { return num_samples_; }
  const StftConfig& Config() const { return config_; }

  Complex& operator()(std::size_t t, std::size_t f) {
    return values_[t * num_bins_ + f];
  }
  const Complex& operator()(std::size_t t, std::size_t f) const {
    return values_[t * num_bins_ + f];
  }
  std::span<Complex> Frame(std::size_t t) {
    return {values_.data() + t * num_bins_, num_bins_};
  }
  std::span<const Complex> Frame(std::size_t t) const {
    return {values_.data() + t * num_bins_, num_bins_};
  }
  std::span<Complex> Values() { return values_; }
  std::span<const Complex> Values() const { return values_; }

  bool SameShape(const ComplexSpectrogram& other) const {
    return num_frames_ == other.num_frames_ && num_bins_ == other.num_bins_;
  }
  bool AllFinite() const;

  ComplexSpectrogram& operator+=(const ComplexSpectrogram& other);
  ComplexSpectrogram& operator*=(Complex scale);

  bool operator==(const ComplexSpectrogram&) const = default;

 private:
  std::size_t num_frames_ = 0;
  std::size_t num_bins_ = 0;
  std::size_t num_samples_ = 0;
  StftConfig config_;
  std::vector<Complex> values_;
};

ComplexSpectrogram operator+(ComplexSpectrogram a, const ComplexSpectrogram& b);

// T x F nonnegative reals, tagged with the exponent they were compressed
// with (1 for plain magnitudes).
class MagnitudeSpectrogram {
 public:
  MagnitudeSpectrogram() = default;
  MagnitudeSpectrogram(std::size_t num_frames, std::size_t num_bins,
                       double exponent = 1.0);
  MagnitudeSpectrogram(std::size_t num_frames, std::size_t num_bins,
                       std::vector<double> values, double exponent = 1.0);

  std::size_t NumFrames() const { return num_frames_; }
  std::size_t NumBins() const { return num_bins_; }
  double Exponent() const { return exponent_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t t, std::size_t f) {
    return values_[t * num_bins_ + f];
  }
  double operator()(std::size_t t, std::size_t f) const {
    return values_[t * num_bins_ + f];
  }
  std::span<double> Values() { return values_; }
  std::span<const double> Values() const { return values_; }

  bool SameShape(const MagnitudeSpectrogram& other) const {
    return num_frames_ == other.num_frames_ && num_bins_ == other.num_bins_;
  }

 private:
  std::size_t num_frames_ = 0;
  std::size_t num_bins_ = 0;
  double exponent_ = 1.0;
  std::vector<double> values_;
};

// Number of frames produced for a signal of the given length:
// 1 + floor(num_samples / hop). The signal is reflect-padded by half a
// window on each side before framing.
std::size_t NumFramesFor(std::size_t num_samples, const StftConfig& config);

ComplexSpectrogram Stft(const Waveform& wave, const StftConfig& config);

// Weighted overlap-add resynthesis. Returns NumSamples() samples.
Waveform Istft(const ComplexSpectrogram& spec);

MagnitudeSpectrogram CompressMagnitude(const ComplexSpectrogram& spec,
                                       double exponent);

// Scales each bin's magnitude by the mask value and keeps its phase.
ComplexSpectrogram ApplyMagnitudeMask(const MagnitudeSpectrogram& mask,
                                      const ComplexSpectrogram& spec);

}  // namespace dsekit

#endif  // DSEKIT_SPECTRAL_H_
