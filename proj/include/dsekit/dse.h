// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Direct sound estimation: a per-subband multi-frame linear filter maps
// close-talk STFT frames onto the far-field (separated) mixture, fitted by
// weighted least squares. Applied to the close-talk signal, the filter
// yields an estimate of the direct-path component of the far-field signal.
//
// Conventions shared by estimation and application:
//   stacked(t, f) = [Y(t, f), Y(t-1, f), ..., Y(t-L+1, f)]^T, Y(t<0) = 0
//   X(t, f)       = taps(f)^H stacked(t, f) = sum_l conj(taps[l]) Y(t-l, f)

#ifndef DSEKIT_DSE_H_
#define DSEKIT_DSE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dsekit/spectral.h"

namespace dsekit {

struct DseConfig {
  double distance_m = 5.0;
  double speed_of_sound = 340.0;  // m/s
  double hop_s = 0.00625;
  // Weight floor relative to the peak power of the far-field spectrogram.
  double epsilon = 0.01;
  // Relative diagonal loading: the normal matrix R is solved as
  // R + loading * trace(R) / L * I. Zero gives the plain weighted LS fit.
  double diagonal_loading = 1e-6;
  std::optional<std::size_t> order_override;
  // Subbands are solved independently; results do not depend on this.
  std::size_t num_threads = 1;

  // Throws std::invalid_argument when a field is out of range.
  void Validate() const;
  // order_override if set, otherwise FilterOrder(distance, speed, hop).
  std::size_t Order() const;
};

// Filter length in frames: ceil(distance / (speed * hop)) + 1. The quotient
// is snapped to the nearest integer when within 1e-9 relative of it, so
// geometries that land exactly on a frame boundary are not pushed up a frame
// by rounding noise.
std::size_t FilterOrder(double distance_m, double speed_of_sound, double hop_s);

// Per-bin weights max(epsilon * max|G|^2, |G(t,f)|^2), row-major T x F.
std::vector<double> WeightingTerm(const ComplexSpectrogram& far_field,
                                  double epsilon);

class DseFilter {
 public:
  DseFilter() = default;
  DseFilter(std::size_t num_bins, std::size_t order);

  std::size_t NumBins() const { return num_bins_; }
  std::size_t Order() const { return order_; }

  std::span<Complex> Taps(std::size_t f) {
    return {taps_.data() + f * order_, order_};
  }
  std::span<const Complex> Taps(std::size_t f) const {
    return {taps_.data() + f * order_, order_};
  }
  std::span<const Complex> AllTaps() const { return taps_; }

  bool operator==(const DseFilter&) const = default;

 private:
  std::size_t num_bins_ = 0;
  std::size_t order_ = 0;
  std::vector<Complex> taps_;  // F x L, row-major by subband
};

// Raised when the normal matrix of a subband cannot be factored. Callers can
// retry with diagonal loading.
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(std::size_t subband, const std::string& what)
      : std::runtime_error(what), subband_(subband) {}
  std::size_t subband() const { return subband_; }

 private:
  std::size_t subband_;
};

struct DseDiagnostics {
  std::size_t order = 0;
  std::size_t num_frames = 0;
  // Subbands whose close-talk input is identically zero; their taps are zero.
  std::size_t silent_subbands = 0;
  // Largest ratio of largest to smallest squared Cholesky pivot over the
  // solved subbands, a cheap lower bound on the condition number.
  double max_pivot_ratio = 0.0;
};

// Weighted least-squares fit with caller-supplied weights (T x F, all > 0):
// per subband minimizes sum_t |G(t,f) - h^H stacked(t,f)|^2 / weights(t,f)
// through the normal equations
//   (R + loading * trace(R) / L * I) h = sum_t stacked conj(G) / weights,
//   R = sum_t stacked stacked^H / weights.
// Subbands whose close-talk input is all zero get zero taps. Throws
// SingularSystemError when a normal matrix is not positive definite.
DseFilter SolveWeightedFilter(const ComplexSpectrogram& far_field,
                              const ComplexSpectrogram& close_talk,
                              std::span<const double> weights,
                              std::size_t order, double loading,
                              std::size_t num_threads = 1,
                              DseDiagnostics* diagnostics = nullptr);

// SolveWeightedFilter with WeightingTerm(far_field, epsilon) and the
// configured order and loading.
DseFilter EstimateFilter(const ComplexSpectrogram& far_field,
                         const ComplexSpectrogram& close_talk,
                         const DseConfig& config,
                         DseDiagnostics* diagnostics = nullptr);

ComplexSpectrogram ApplyFilter(const DseFilter& filter,
                               const ComplexSpectrogram& close_talk);

struct DseResult {
  ComplexSpectrogram estimate;
  DseFilter filter;
  DseDiagnostics diagnostics;
};

DseResult DseEstimate(const ComplexSpectrogram& far_field,
                      const ComplexSpectrogram& close_talk,
                      const DseConfig& config);

}  // namespace dsekit

#endif  // DSEKIT_DSE_H_
