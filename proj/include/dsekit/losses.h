// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Spectrogram losses for training on pseudo-labels: an MSE term plus an
// alpha-weighted cosine term that only constrains the shape of the target.
// Inputs are normally power-law compressed magnitudes; compressing is the
// caller's job.

#ifndef DSEKIT_LOSSES_H_
#define DSEKIT_LOSSES_H_

#include <span>

#include "dsekit/spectral.h"

namespace dsekit {

struct LossConfig {
  double alpha = 0.2;
};

// Mean over all T*F elements of (a - b)^2.
double MseLoss(const MagnitudeSpectrogram& a, const MagnitudeSpectrogram& b);

// <a, b>_F / (|a|_F |b|_F). Throws if either operand has zero norm.
double CosineSimilarity(const MagnitudeSpectrogram& a,
                        const MagnitudeSpectrogram& b);

// 1 - <a, b>_F / (|a|_F |b|_F). Throws if either operand has zero norm.
double CossimLoss(const MagnitudeSpectrogram& a, const MagnitudeSpectrogram& b);

double McaLoss(const MagnitudeSpectrogram& a, const MagnitudeSpectrogram& b,
               const LossConfig& config = {});

// Batch form: the mean of the per-pair losses.
double McaLoss(std::span<const MagnitudeSpectrogram> a,
               std::span<const MagnitudeSpectrogram> b,
               const LossConfig& config = {});

// d McaLoss / d b, row-major T x F.
std::vector<double> McaLossGradient(const MagnitudeSpectrogram& a,
                                    const MagnitudeSpectrogram& b,
                                    const LossConfig& config = {});

}  // namespace dsekit

#endif  // DSEKIT_LOSSES_H_
