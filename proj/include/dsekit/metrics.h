// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DSEKIT_METRICS_H_
#define DSEKIT_METRICS_H_

#include "dsekit/spectral.h"

namespace dsekit {

// SI-SDR results are clamped to +/- this value. An exact match reports the
// upper cap.
inline constexpr double kSiSdrCapDb = 100.0;

// Scale-invariant SDR of estimate against reference, in dB.
double SiSdr(const Waveform& estimate, const Waveform& reference);

// RMS over bins of 10 log10((|a|^2 + floor) / (|b|^2 + floor)).
double LogSpectralDistance(const ComplexSpectrogram& a,
                           const ComplexSpectrogram& b, double floor);

// <a, b>_F / (|a|_F |b|_F); throws on a zero-norm operand.
double SpectralCosine(const MagnitudeSpectrogram& a,
                      const MagnitudeSpectrogram& b);

struct MetricReport {
  double si_sdr_db = 0.0;
  double lsd_db = 0.0;
  double spectral_cosine = 0.0;
  // SI-SDR hit the upper cap (perfect match up to scale).
  bool si_sdr_capped = false;
};

struct EvalOptions {
  StftConfig stft;
  double compress_exponent = 0.3;
  double lsd_floor = 1e-8;
};

MetricReport Evaluate(const Waveform& estimate, const Waveform& reference,
                      const EvalOptions& options = {});

}  // namespace dsekit

#endif  // DSEKIT_METRICS_H_
