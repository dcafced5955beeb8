// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "dsekit/dse.h"
#include "dsekit/metrics.h"
#include "dsekit/scene.h"
#include "test_util.h"

namespace dsekit {
namespace {

using testing::MakeSpectrogram;
using testing::RandomSpectrogram;

std::vector<double> Ones(std::size_t n) { return std::vector<double>(n, 1.0); }

ComplexSpectrogram Column(std::initializer_list<Complex> values) {
  auto s = MakeSpectrogram(values.size(), 1);
  std::size_t t = 0;
  for (const auto& v : values) s(t++, 0) = v;
  return s;
}

DseConfig PlainLs(std::size_t order) {
  DseConfig c;
  c.order_override = order;
  c.diagonal_loading = 0.0;
  return c;
}

TEST_CASE("filter order examples") {
  CHECK(FilterOrder(5.0, 340.0, 0.00625) == 4);
  CHECK(FilterOrder(0.0, 340.0, 0.00625) == 1);
  CHECK(FilterOrder(10.0, 340.0, 0.00625) == 6);
  // Exactly two frames of travel stays at two.
  CHECK(FilterOrder(4.25, 340.0, 0.00625) == 3);
  CHECK(FilterOrder(4.2500001, 340.0, 0.00625) == 4);
}

TEST_CASE("filter order agrees with counting over random geometries") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(0.0, 30.0), speed(300.0, 360.0),
      hop(0.002, 0.02);
  for (int i = 0; i < 500; ++i) {
    const double d = dist(rng), a = speed(rng), h = hop(rng);
    CHECK(FilterOrder(d, a, h) == testing::CountedFilterOrder(d, a, h));
  }
}

TEST_CASE("filter order rejects bad geometry") {
  CHECK_THROWS_AS(FilterOrder(5.0, 0.0, 0.00625), std::invalid_argument);
  CHECK_THROWS_AS(FilterOrder(5.0, 340.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(FilterOrder(5.0, -340.0, 0.00625), std::invalid_argument);
  CHECK_THROWS_AS(FilterOrder(-1.0, 340.0, 0.00625), std::invalid_argument);
  CHECK_THROWS_AS(FilterOrder(NAN, 340.0, 0.00625), std::invalid_argument);
}

TEST_CASE("config validation") {
  DseConfig c;
  CHECK_NOTHROW(c.Validate());
  CHECK(c.Order() == 4);
  for (double eps : {0.0, 1.0, -0.1, 2.0}) {
    DseConfig bad;
    bad.epsilon = eps;
    CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
  }
  DseConfig neg_load;
  neg_load.diagonal_loading = -1e-3;
  CHECK_THROWS_AS(neg_load.Validate(), std::invalid_argument);
  DseConfig zero_hop;
  zero_hop.hop_s = 0.0;
  CHECK_THROWS_AS(zero_hop.Validate(), std::invalid_argument);
  DseConfig zero_order;
  zero_order.order_override = 0;
  CHECK_THROWS_AS(zero_order.Validate(), std::invalid_argument);
  DseConfig overridden;
  overridden.order_override = 7;
  CHECK(overridden.Order() == 7);
}

TEST_CASE("weighting term floors at epsilon times the peak power") {
  auto g = MakeSpectrogram(1, 3);
  g(0, 0) = Complex(0.0, 3.0);             // power 9
  g(0, 1) = Complex(std::sqrt(0.02), 0.0);  // power 0.02
  g(0, 2) = std::polar(std::sqrt(0.5), 1.0);
  const auto w = WeightingTerm(g, 0.01);
  CHECK(w[0] == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(w[2] == doctest::Approx(0.5).epsilon(1e-15));

  const auto r = RandomSpectrogram(20, 7, 3);
  const auto wr = WeightingTerm(r, 0.05);
  double peak = 0.0;
  for (const auto& v : r.Values()) peak = std::max(peak, std::norm(v));
  for (double x : wr) CHECK(x >= 0.05 * peak);
}

TEST_CASE("weighting term errors") {
  CHECK_THROWS_AS(WeightingTerm(MakeSpectrogram(3, 2), 0.01),
                  std::invalid_argument);
  const auto g = RandomSpectrogram(3, 2, 1);
  CHECK_THROWS_AS(WeightingTerm(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(WeightingTerm(g, 1.0), std::invalid_argument);
}

TEST_CASE("collinear scalar case gives tap 2") {
  const auto y = Column({1.0, 2.0});
  const auto g = Column({2.0, 4.0});
  const auto h = SolveWeightedFilter(g, y, Ones(2), 1, 0.0);
  CHECK(h.Taps(0)[0].real() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(h.Taps(0)[0].imag() == 0.0);
}

TEST_CASE("weighted scalar case gives tap 7/3") {
  const auto y = Column({1.0, 1.0});
  const auto g = Column({1.0, 3.0});
  const std::vector<double> w = {1.0, 0.5};
  const auto h = SolveWeightedFilter(g, y, w, 1, 0.0);
  CHECK(h.Taps(0)[0].real() == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("complex taps follow the conjugate convention") {
  const Complex tap(0.3, -0.8);
  const auto y = RandomSpectrogram(12, 1, 4);
  auto g = MakeSpectrogram(12, 1);
  for (std::size_t t = 0; t < 12; ++t) g(t, 0) = std::conj(tap) * y(t, 0);
  const auto h = EstimateFilter(g, y, PlainLs(1));
  CHECK(std::abs(h.Taps(0)[0] - tap) < 1e-14);
  const auto x = ApplyFilter(h, y);
  CHECK(testing::MaxAbsDiff(x.Values(), g.Values()) < 1e-14);
}

TEST_CASE("normal equations match a dense pseudo-inverse") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> order_dist(1, 3);
  std::uniform_real_distribution<double> weight(0.1, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t order = order_dist(rng);
    const std::size_t frames =
        std::uniform_int_distribution<std::size_t>(order, 8)(rng);
    const auto y = RandomSpectrogram(frames, 1, 1000 + trial);
    const auto g = RandomSpectrogram(frames, 1, 5000 + trial);
    std::vector<double> w(frames);
    for (double& v : w) v = weight(rng);
    const auto h = SolveWeightedFilter(g, y, w, order, 0.0);

    std::vector<Complex> far(frames), close(frames);
    for (std::size_t t = 0; t < frames; ++t) {
      far[t] = g(t, 0);
      close[t] = y(t, 0);
    }
    const auto oracle = testing::PseudoInverseFilter(far, close, w, order);
    double num = 0.0, den = 0.0;
    for (std::size_t l = 0; l < order; ++l) {
      num += std::norm(h.Taps(0)[l] - oracle(l));
      den += std::norm(oracle(l));
    }
    CHECK(std::sqrt(num / den) < 1e-8);
  }
}

TEST_CASE("residual is orthogonal to the stacked history") {
  const std::size_t frames = 60, bins = 5, order = 3;
  const auto y = RandomSpectrogram(frames, bins, 31);
  const auto g = RandomSpectrogram(frames, bins, 32);
  const auto cfg = PlainLs(order);
  const auto h = EstimateFilter(g, y, cfg);
  const auto x = ApplyFilter(h, y);
  const auto w = WeightingTerm(g, cfg.epsilon);
  for (std::size_t f = 0; f < bins; ++f) {
    for (std::size_t l = 0; l < order; ++l) {
      Complex resid_corr = 0.0;
      double scale = 0.0;
      for (std::size_t t = l; t < frames; ++t) {
        const double inv = 1.0 / w[t * bins + f];
        resid_corr += y(t - l, f) * std::conj(g(t, f) - x(t, f)) * inv;
        scale += std::abs(y(t - l, f) * std::conj(g(t, f))) * inv;
      }
      CHECK(std::abs(resid_corr) / scale < 1e-8);
    }
  }
}

TEST_CASE("identity and zero filters") {
  const auto y = RandomSpectrogram(9, 4, 2);
  DseFilter identity(4, 3);
  for (std::size_t f = 0; f < 4; ++f) identity.Taps(f)[0] = 1.0;
  CHECK(ApplyFilter(identity, y) == y);
  const auto zero = ApplyFilter(DseFilter(4, 3), y);
  for (const auto& v : zero.Values()) CHECK(v == Complex(0.0, 0.0));
  CHECK_THROWS_AS(ApplyFilter(DseFilter(5, 3), y), std::invalid_argument);
  CHECK_THROWS_AS(DseFilter(4, 0), std::invalid_argument);
}

TEST_CASE("far field equal to close talk collapses to the identity") {
  const auto y = RandomSpectrogram(40, 6, 8);
  const auto exact = DseEstimate(y, y, PlainLs(4));
  CHECK(testing::MaxAbsDiff(exact.estimate.Values(), y.Values()) < 1e-8);
  for (std::size_t f = 0; f < 6; ++f) {
    CHECK(std::abs(exact.filter.Taps(f)[0] - 1.0) < 1e-10);
    for (std::size_t l = 1; l < 4; ++l)
      CHECK(std::abs(exact.filter.Taps(f)[l]) < 1e-10);
  }
  DseConfig loaded;
  loaded.order_override = 4;
  const auto biased = DseEstimate(y, y, loaded);
  CHECK(testing::MaxAbsDiff(biased.estimate.Values(), y.Values()) < 1e-4);
}

TEST_CASE("shape and length errors") {
  const auto y = RandomSpectrogram(5, 3, 1);
  CHECK_THROWS_AS(EstimateFilter(RandomSpectrogram(6, 3, 2), y, PlainLs(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(EstimateFilter(RandomSpectrogram(5, 4, 2), y, PlainLs(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(EstimateFilter(RandomSpectrogram(5, 3, 2), y, PlainLs(6)),
                  std::invalid_argument);
  const auto g = RandomSpectrogram(5, 3, 2);
  CHECK_THROWS_AS(SolveWeightedFilter(g, y, Ones(14), 2, 0.0),
                  std::invalid_argument);
  auto w = Ones(15);
  w[3] = 0.0;
  CHECK_THROWS_AS(SolveWeightedFilter(g, y, w, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SolveWeightedFilter(g, y, Ones(15), 2, -1.0),
                  std::invalid_argument);
}

TEST_CASE("singular subband is reported and loading recovers") {
  auto y = RandomSpectrogram(10, 3, 4);
  for (std::size_t t = 0; t + 1 < 10; ++t) y(t, 1) = 0.0;
  const auto g = RandomSpectrogram(10, 3, 5);
  try {
    EstimateFilter(g, y, PlainLs(2));
    FAIL("expected a singular system");
  } catch (const SingularSystemError& e) {
    CHECK(e.subband() == 1);
  }
  DseConfig loaded = PlainLs(2);
  loaded.diagonal_loading = 1e-3;
  DseDiagnostics diag;
  const auto h = EstimateFilter(g, y, loaded, &diag);
  for (const auto& v : h.AllTaps()) CHECK(std::isfinite(std::abs(v)));
  CHECK(diag.max_pivot_ratio > 1.0);
}

TEST_CASE("silent close-talk subbands get zero taps") {
  auto y = RandomSpectrogram(12, 4, 6);
  for (std::size_t t = 0; t < 12; ++t) y(t, 2) = 0.0;
  const auto g = RandomSpectrogram(12, 4, 7);
  DseDiagnostics diag;
  const auto h = EstimateFilter(g, y, PlainLs(3), &diag);
  CHECK(diag.silent_subbands == 1);
  CHECK(diag.order == 3);
  CHECK(diag.num_frames == 12);
  for (const auto& v : h.Taps(2)) CHECK(v == Complex(0.0, 0.0));
}

TEST_CASE("subbands are solved independently") {
  const std::size_t frames = 30, bins = 7;
  const auto y = RandomSpectrogram(frames, bins, 9);
  const auto g = RandomSpectrogram(frames, bins, 10);
  const std::vector<std::size_t> perm = {3, 6, 0, 1, 5, 2, 4};
  auto yp = MakeSpectrogram(frames, bins), gp = MakeSpectrogram(frames, bins);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t f = 0; f < bins; ++f) {
      yp(t, f) = y(t, perm[f]);
      gp(t, f) = g(t, perm[f]);
    }
  DseConfig cfg;
  cfg.order_override = 3;
  const auto h = EstimateFilter(g, y, cfg);
  const auto hp = EstimateFilter(gp, yp, cfg);
  for (std::size_t f = 0; f < bins; ++f)
    for (std::size_t l = 0; l < 3; ++l)
      CHECK(hp.Taps(f)[l] == h.Taps(perm[f])[l]);
}

TEST_CASE("results do not depend on the thread count") {
  const auto y = RandomSpectrogram(50, 33, 11);
  const auto g = RandomSpectrogram(50, 33, 12);
  DseConfig cfg;
  cfg.order_override = 4;
  const auto serial = EstimateFilter(g, y, cfg);
  for (std::size_t threads : {2, 3, 8, 64}) {
    cfg.num_threads = threads;
    CHECK(EstimateFilter(g, y, cfg) == serial);
  }
}

TEST_CASE("scaling the close talk rescales the taps and keeps the estimate") {
  const auto y = RandomSpectrogram(40, 5, 13);
  const auto g = RandomSpectrogram(40, 5, 14);
  for (const Complex c : {Complex(2.5, 0.0), Complex(-0.3, 1.7),
                          Complex(0.0, -0.01)}) {
    for (double loading : {0.0, 1e-6}) {
      DseConfig cfg = PlainLs(3);
      cfg.diagonal_loading = loading;
      auto yc = y;
      yc *= c;
      const auto base = DseEstimate(g, y, cfg);
      const auto scaled = DseEstimate(g, yc, cfg);
      for (std::size_t i = 0; i < base.filter.AllTaps().size(); ++i)
        CHECK(std::abs(scaled.filter.AllTaps()[i] -
                       base.filter.AllTaps()[i] / std::conj(c)) <
              1e-10 * std::max(1.0, std::abs(base.filter.AllTaps()[i] / c)));
      CHECK(testing::MaxAbsDiff(scaled.estimate.Values(),
                                base.estimate.Values()) < 1e-10);
    }
  }
}

TEST_CASE("pure-delay scene: taps read back and the estimate matches") {
  // 4 m at 340 m/s with a 6.25 ms hop is a delay of 2 frames.
  const auto spec = testing::PureDelayScene(3, 0.5, 4.0);
  const auto scene = SynthesizeScene(spec);
  REQUIRE(scene.filters.delay_frames == 2);
  DseConfig cfg;
  cfg.distance_m = 4.0;
  cfg.diagonal_loading = 0.0;
  REQUIRE(cfg.Order() == 3);
  const auto result = DseEstimate(scene.far_mixture, scene.close_talk, cfg);
  for (std::size_t f = 0; f < result.filter.NumBins(); ++f) {
    const auto taps = result.filter.Taps(f);
    CHECK(std::abs(taps[2] - 0.5) < 1e-6);
    CHECK(std::abs(taps[0]) < 1e-6);
    CHECK(std::abs(taps[1]) < 1e-6);
  }
  CHECK(testing::SpectrogramSiSdr(result.estimate, scene.direct_sound) >= 40.0);
}

TEST_CASE("a filter shorter than the delay fails to recover the direct sound") {
  const auto scene = SynthesizeScene(testing::PureDelayScene(4, 0.7, 4.0));
  DseConfig cfg;
  cfg.distance_m = 4.0;
  cfg.diagonal_loading = 0.0;
  const double good = testing::SpectrogramSiSdr(
      DseEstimate(scene.far_mixture, scene.close_talk, cfg).estimate,
      scene.direct_sound);
  cfg.order_override = 2;
  const double short_filter = testing::SpectrogramSiSdr(
      DseEstimate(scene.far_mixture, scene.close_talk, cfg).estimate,
      scene.direct_sound);
  MESSAGE("SI-SDR with correct order " << good << " dB, short " << short_filter
                                       << " dB");
  CHECK(good - short_filter > 20.0);
}

TEST_CASE("interference on disjoint subbands leaves the target filter alone") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto clean = SynthesizeScene(testing::PartitionedScene(seed, false));
    const auto mixed = SynthesizeScene(testing::PartitionedScene(seed, true));
    REQUIRE(WdoOverlapRatio(mixed.direct_sound,
                            mixed.interference_plus_noise, 0.0) == 0.0);
    DseConfig cfg;
    cfg.distance_m = clean.spec.distance_m[0];
    const auto h_clean =
        EstimateFilter(clean.far_mixture, clean.close_talk, cfg);
    const auto h_mixed =
        EstimateFilter(mixed.far_mixture, mixed.close_talk, cfg);
    double worst = 0.0;
    for (std::size_t f = 0; f < h_clean.NumBins(); f += 2)
      worst = std::max(worst, testing::MaxAbsDiff(h_clean.Taps(f),
                                                  h_mixed.Taps(f)));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("on a noisy reverberant scene DSE beats the raw close talk") {
  const auto scene = SynthesizeScene(testing::NoisyReverbScene(5));
  DseConfig cfg;
  cfg.distance_m = scene.spec.distance_m[0];
  const auto result = DseEstimate(scene.far_mixture, scene.close_talk, cfg);
  const double dse = testing::SpectrogramSiSdr(result.estimate,
                                               scene.direct_sound);
  const double raw = testing::SpectrogramSiSdr(scene.close_talk,
                                               scene.direct_sound);
  MESSAGE("DSE " << dse << " dB, close talk " << raw << " dB");
  CHECK(dse > raw);
}

}  // namespace
}  // namespace dsekit
