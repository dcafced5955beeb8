// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsekit/losses.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsekit {

namespace {

void CheckShapes(const MagnitudeSpectrogram& a, const MagnitudeSpectrogram& b,
                 const char* op) {
  if (!a.SameShape(b))
    throw std::invalid_argument(
        std::string(op) + ": shape mismatch " + std::to_string(a.NumFrames()) +
        "x" + std::to_string(a.NumBins()) + " vs " +
        std::to_string(b.NumFrames()) + "x" + std::to_string(b.NumBins()));
  if (a.size() == 0) throw std::invalid_argument(std::string(op) + ": empty");
}

struct Moments {
  double ab = 0.0, aa = 0.0, bb = 0.0;
};

Moments InnerProducts(const MagnitudeSpectrogram& a,
                      const MagnitudeSpectrogram& b) {
  Moments m;
  auto x = a.Values();
  auto y = b.Values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.ab += x[i] * y[i];
    m.aa += x[i] * x[i];
    m.bb += y[i] * y[i];
  }
  if (!(m.aa > 0.0) || !(m.bb > 0.0))
    throw std::invalid_argument(
        "cossim_loss: cosine undefined for a zero-norm spectrogram");
  return m;
}

}  // namespace

double MseLoss(const MagnitudeSpectrogram& a, const MagnitudeSpectrogram& b) {
  CheckShapes(a, b, "mse_loss");
  auto x = a.Values();
  auto y = b.Values();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

double CosineSimilarity(const MagnitudeSpectrogram& a,
                        const MagnitudeSpectrogram& b) {
  CheckShapes(a, b, "cosine_similarity");
  const Moments m = InnerProducts(a, b);
  // sqrt(aa * bb) is exact for a == b, so cos(a, a) comes out as 1.
  return std::min(1.0, m.ab / std::sqrt(m.aa * m.bb));
}

double CossimLoss(const MagnitudeSpectrogram& a,
                  const MagnitudeSpectrogram& b) {
  return 1.0 - CosineSimilarity(a, b);
}

double McaLoss(const MagnitudeSpectrogram& a, const MagnitudeSpectrogram& b,
               const LossConfig& config) {
  if (!(config.alpha >= 0.0))
    throw std::invalid_argument("mca_loss: alpha must be >= 0");
  const double mse = MseLoss(a, b);
  if (config.alpha == 0.0) return mse;
  return mse + config.alpha * CossimLoss(a, b);
}

double McaLoss(std::span<const MagnitudeSpectrogram> a,
               std::span<const MagnitudeSpectrogram> b,
               const LossConfig& config) {
  if (a.size() != b.size())
    throw std::invalid_argument("mca_loss: batch sizes differ");
  if (a.empty()) throw std::invalid_argument("mca_loss: empty batch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += McaLoss(a[i], b[i], config);
  return acc / static_cast<double>(a.size());
}

std::vector<double> McaLossGradient(const MagnitudeSpectrogram& a,
                                    const MagnitudeSpectrogram& b,
                                    const LossConfig& config) {
  CheckShapes(a, b, "mca_loss");
  auto x = a.Values();
  auto y = b.Values();
  const double n = static_cast<double>(x.size());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] = 2.0 * (y[i] - x[i]) / n;
  if (config.alpha == 0.0) return grad;

  // d cos / d b = a / (|a||b|) - <a,b> b / (|a| |b|^3)
  const Moments m = InnerProducts(a, b);
  const double na = std::sqrt(m.aa), nb = std::sqrt(m.bb);
  const double c1 = 1.0 / (na * nb);
  const double c2 = m.ab / (na * nb * m.bb);
  for (std::size_t i = 0; i < x.size(); ++i)
    grad[i] -= config.alpha * (c1 * x[i] - c2 * y[i]);
  return grad;
}

}  // namespace dsekit
