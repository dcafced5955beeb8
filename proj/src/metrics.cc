// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsekit/metrics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dsekit/losses.h"

namespace dsekit {

double SiSdr(const Waveform& estimate, const Waveform& reference) {
  if (estimate.size() != reference.size())
    throw std::invalid_argument(
        "si_sdr: estimate has " + std::to_string(estimate.size()) +
        " samples, reference has " + std::to_string(reference.size()));
  double ref_energy = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    ref_energy += reference.samples[i] * reference.samples[i];
    cross += estimate.samples[i] * reference.samples[i];
  }
  if (!(ref_energy > 0.0))
    throw std::invalid_argument("si_sdr: reference is identically zero");
  const double scale = cross / ref_energy;
  double target = 0.0, error = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = scale * reference.samples[i];
    const double e = estimate.samples[i] - s;
    target += s * s;
    error += e * e;
  }
  if (error == 0.0) return target > 0.0 ? kSiSdrCapDb : -kSiSdrCapDb;
  if (target == 0.0) return -kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(target / error), -kSiSdrCapDb,
                    kSiSdrCapDb);
}

double LogSpectralDistance(const ComplexSpectrogram& a,
                           const ComplexSpectrogram& b, double floor) {
  if (!a.SameShape(b))
    throw std::invalid_argument("log_spectral_distance: shape mismatch");
  if (!(floor > 0.0))
    throw std::invalid_argument("log_spectral_distance: floor must be > 0");
  auto x = a.Values();
  auto y = b.Values();
  if (x.empty()) throw std::invalid_argument("log_spectral_distance: empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d =
        10.0 * std::log10((std::norm(x[i]) + floor) / (std::norm(y[i]) + floor));
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double SpectralCosine(const MagnitudeSpectrogram& a,
                      const MagnitudeSpectrogram& b) {
  return CosineSimilarity(a, b);
}

MetricReport Evaluate(const Waveform& estimate, const Waveform& reference,
                      const EvalOptions& options) {
  MetricReport report;
  report.si_sdr_db = SiSdr(estimate, reference);
  report.si_sdr_capped = report.si_sdr_db >= kSiSdrCapDb;
  const auto est_spec = Stft(estimate, options.stft);
  const auto ref_spec = Stft(reference, options.stft);
  report.lsd_db = LogSpectralDistance(est_spec, ref_spec, options.lsd_floor);
  report.spectral_cosine =
      SpectralCosine(CompressMagnitude(est_spec, options.compress_exponent),
                     CompressMagnitude(ref_spec, options.compress_exponent));
  return report;
}

}  // namespace dsekit
