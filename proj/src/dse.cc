// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsekit/dse.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace dsekit {

namespace {

// Runs body(f) for f in [0, n) on up to num_threads threads. The first
// exception thrown by any worker is rethrown on the caller's thread.
template <typename Body>
void ParallelFor(std::size_t n, std::size_t num_threads, Body&& body) {
  num_threads = std::clamp<std::size_t>(num_threads, 1, std::max<std::size_t>(n, 1));
  if (num_threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < num_threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

// In-place Cholesky of a Hermitian matrix (row-major, lower triangle used),
// then forward/back substitution. Returns false if a pivot falls below
// min_allowed, which callers set relative to the trace.
bool CholeskySolve(std::vector<Complex>& a, std::vector<Complex>& b,
                   std::size_t n, double min_allowed, double* pivot_ratio) {
  double min_pivot = INFINITY, max_pivot = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j].real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(a[j * n + k]);
    if (!(d > min_allowed) || !std::isfinite(d)) return false;
    min_pivot = std::min(min_pivot, d);
    max_pivot = std::max(max_pivot, d);
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * std::conj(a[j * n + k]);
      a[i * n + j] = s / ljj;
    }
  }
  // L z = b
  for (std::size_t i = 0; i < n; ++i) {
    Complex s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i].real();
  }
  // L^H x = z
  for (std::size_t i = n; i-- > 0;) {
    Complex s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= std::conj(a[k * n + i]) * b[k];
    b[i] = s / a[i * n + i].real();
  }
  *pivot_ratio = max_pivot / min_pivot;
  return true;
}

void CheckInputs(const ComplexSpectrogram& far_field,
                 const ComplexSpectrogram& close_talk) {
  if (!far_field.SameShape(close_talk))
    throw std::invalid_argument(
        "dse: far-field spectrogram is " +
        std::to_string(far_field.NumFrames()) + "x" +
        std::to_string(far_field.NumBins()) + " but close-talk is " +
        std::to_string(close_talk.NumFrames()) + "x" +
        std::to_string(close_talk.NumBins()));
}

}  // namespace

void DseConfig::Validate() const {
  if (!(distance_m >= 0.0) || !std::isfinite(distance_m))
    throw std::invalid_argument("dse: distance must be finite and >= 0");
  if (!(speed_of_sound > 0.0))
    throw std::invalid_argument("dse: speed of sound must be positive");
  if (!(hop_s > 0.0)) throw std::invalid_argument("dse: hop must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("dse: epsilon must be in (0, 1)");
  if (!(diagonal_loading >= 0.0) || !std::isfinite(diagonal_loading))
    throw std::invalid_argument("dse: diagonal loading must be >= 0");
  if (order_override && *order_override == 0)
    throw std::invalid_argument("dse: filter order must be >= 1");
}

std::size_t DseConfig::Order() const {
  return order_override ? *order_override
                        : FilterOrder(distance_m, speed_of_sound, hop_s);
}

std::size_t FilterOrder(double distance_m, double speed_of_sound,
                        double hop_s) {
  if (!(speed_of_sound > 0.0))
    throw std::invalid_argument("filter_order: speed of sound must be > 0");
  if (!(hop_s > 0.0))
    throw std::invalid_argument("filter_order: hop must be > 0");
  if (!(distance_m >= 0.0) || !std::isfinite(distance_m))
    throw std::invalid_argument("filter_order: distance must be >= 0");
  double frames = distance_m / (speed_of_sound * hop_s);
  const double nearest = std::round(frames);
  if (std::abs(frames - nearest) <= 1e-9 * std::max(1.0, nearest))
    frames = nearest;
  return static_cast<std::size_t>(std::ceil(frames)) + 1;
}

std::vector<double> WeightingTerm(const ComplexSpectrogram& far_field,
                                  double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("weighting_term: epsilon must be in (0, 1)");
  auto values = far_field.Values();
  if (values.empty())
    throw std::invalid_argument("weighting_term: empty spectrogram");
  std::vector<double> power(values.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    power[i] = std::norm(values[i]);
    peak = std::max(peak, power[i]);
  }
  if (!(peak > 0.0))
    throw std::invalid_argument(
        "weighting_term: far-field spectrogram is identically zero");
  const double floor = epsilon * peak;
  for (double& p : power) p = std::max(floor, p);
  return power;
}

DseFilter::DseFilter(std::size_t num_bins, std::size_t order)
    : num_bins_(num_bins), order_(order), taps_(num_bins * order) {
  if (order == 0) throw std::invalid_argument("dse filter: order must be >= 1");
}

DseFilter SolveWeightedFilter(const ComplexSpectrogram& far_field,
                              const ComplexSpectrogram& close_talk,
                              std::span<const double> weights,
                              std::size_t order, double loading,
                              std::size_t num_threads,
                              DseDiagnostics* diagnostics) {
  CheckInputs(far_field, close_talk);
  const std::size_t num_frames = far_field.NumFrames();
  const std::size_t num_bins = far_field.NumBins();
  if (order == 0) throw std::invalid_argument("dse: filter order must be >= 1");
  if (num_frames < order)
    throw std::invalid_argument("dse: " + std::to_string(num_frames) +
                                " frames is fewer than the filter order " +
                                std::to_string(order));
  if (weights.size() != num_frames * num_bins)
    throw std::invalid_argument("dse: weight count does not match T x F");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("dse: weights must be finite and positive");
  if (!(loading >= 0.0) || !std::isfinite(loading))
    throw std::invalid_argument("dse: diagonal loading must be >= 0");

  DseFilter filter(num_bins, order);
  std::vector<double> pivot_ratio(num_bins, 0.0);
  std::vector<char> silent(num_bins, 0);

  ParallelFor(num_bins, num_threads, [&](std::size_t f) {
    // R = sum_t y y^H / lambda, p = sum_t y conj(G) / lambda
    std::vector<Complex> r(order * order), p(order);
    for (std::size_t t = 0; t < num_frames; ++t) {
      const double inv_w = 1.0 / weights[t * num_bins + f];
      const Complex g_conj = std::conj(far_field(t, f));
      const std::size_t depth = std::min(order, t + 1);
      for (std::size_t i = 0; i < depth; ++i) {
        const Complex yi = close_talk(t - i, f) * inv_w;
        p[i] += yi * g_conj;
        for (std::size_t j = 0; j <= i; ++j)
          r[i * order + j] += yi * std::conj(close_talk(t - j, f));
      }
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < order; ++i) trace += r[i * order + i].real();
    if (trace == 0.0) {
      silent[f] = 1;
      return;
    }
    const double load = loading * trace / static_cast<double>(order);
    for (std::size_t i = 0; i < order; ++i) r[i * order + i] += load;
    if (!CholeskySolve(r, p, order, 1e-13 * trace, &pivot_ratio[f]))
      throw SingularSystemError(
          f, "dse: normal matrix of subband " + std::to_string(f) +
                 " is singular; retry with diagonal loading > 0");
    std::copy(p.begin(), p.end(), filter.Taps(f).begin());
  });

  if (diagnostics) {
    diagnostics->order = order;
    diagnostics->num_frames = num_frames;
    diagnostics->silent_subbands = static_cast<std::size_t>(
        std::count(silent.begin(), silent.end(), 1));
    diagnostics->max_pivot_ratio =
        *std::max_element(pivot_ratio.begin(), pivot_ratio.end());
  }
  return filter;
}

DseFilter EstimateFilter(const ComplexSpectrogram& far_field,
                         const ComplexSpectrogram& close_talk,
                         const DseConfig& config, DseDiagnostics* diagnostics) {
  config.Validate();
  CheckInputs(far_field, close_talk);
  const auto weights = WeightingTerm(far_field, config.epsilon);
  return SolveWeightedFilter(far_field, close_talk, weights, config.Order(),
                             config.diagonal_loading, config.num_threads,
                             diagnostics);
}

ComplexSpectrogram ApplyFilter(const DseFilter& filter,
                               const ComplexSpectrogram& close_talk) {
  if (filter.NumBins() != close_talk.NumBins())
    throw std::invalid_argument(
        "apply_filter: filter has " + std::to_string(filter.NumBins()) +
        " subbands, spectrogram has " + std::to_string(close_talk.NumBins()));
  ComplexSpectrogram out(close_talk.NumFrames(), close_talk.Config(),
                         close_talk.NumSamples());
  const std::size_t order = filter.Order();
  for (std::size_t t = 0; t < close_talk.NumFrames(); ++t) {
    const std::size_t depth = std::min(order, t + 1);
    for (std::size_t f = 0; f < close_talk.NumBins(); ++f) {
      auto taps = filter.Taps(f);
      Complex acc = 0.0;
      for (std::size_t l = 0; l < depth; ++l)
        acc += std::conj(taps[l]) * close_talk(t - l, f);
      out(t, f) = acc;
    }
  }
  return out;
}

DseResult DseEstimate(const ComplexSpectrogram& far_field,
                      const ComplexSpectrogram& close_talk,
                      const DseConfig& config) {
  DseResult result;
  result.filter = EstimateFilter(far_field, close_talk, config,
                                 &result.diagnostics);
  result.estimate = ApplyFilter(result.filter, close_talk);
  return result;
}

}  // namespace dsekit
