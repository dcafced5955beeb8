// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dsekit/losses.h"

namespace dsekit {
namespace {

MagnitudeSpectrogram Mag(std::size_t t, std::size_t f,
                         std::vector<double> values) {
  return MagnitudeSpectrogram(t, f, std::move(values));
}

MagnitudeSpectrogram RandomMag(std::size_t t, std::size_t f,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  std::vector<double> v(t * f);
  for (double& x : v) x = u(rng);
  return Mag(t, f, v);
}

TEST_CASE("mse examples") {
  const auto a = Mag(2, 2, {1, 0, 0, 1});
  const auto b = Mag(2, 2, {0, 1, 1, 0});
  CHECK(MseLoss(a, a) == 0.0);
  CHECK(MseLoss(Mag(2, 2, {1, 1, 1, 1}), Mag(2, 2, {0, 0, 0, 0})) == 1.0);
  CHECK(MseLoss(a, b) == 1.0);
  CHECK_THROWS_AS(MseLoss(a, Mag(1, 4, {1, 1, 1, 1})), std::invalid_argument);
}

TEST_CASE("cossim examples") {
  const auto a = Mag(2, 2, {1, 0, 0, 1});
  const auto b = Mag(2, 2, {0, 1, 1, 0});
  CHECK(CossimLoss(a, b) == 1.0);
  const auto c = Mag(2, 2, {0.3, 1.2, 0.0, 4.0});
  const auto c2 = Mag(2, 2, {0.6, 2.4, 0.0, 8.0});
  CHECK(std::abs(CossimLoss(c, c2)) < 1e-15);
  CHECK(std::abs(CossimLoss(Mag(1, 2, {1, 0}), Mag(1, 2, {1, 1})) -
                 (1.0 - 1.0 / std::sqrt(2.0))) < 1e-12);
  CHECK(CosineSimilarity(Mag(1, 2, {1, 0}), Mag(1, 2, {1, 1})) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(CossimLoss(a, Mag(2, 2, {0, 0, 0, 0})), std::invalid_argument);
  CHECK_THROWS_AS(CossimLoss(a, Mag(4, 1, {1, 1, 1, 1})), std::invalid_argument);
}

TEST_CASE("mca examples") {
  const auto a = Mag(2, 2, {1, 0, 0, 1});
  const auto b = Mag(2, 2, {0, 1, 1, 0});
  CHECK(McaLoss(a, a) == 0.0);
  CHECK(std::abs(McaLoss(a, b, {0.2}) - 1.2) < 1e-12);
  std::mt19937_64 rng(1);
  const auto x = RandomMag(5, 7, rng), y = RandomMag(5, 7, rng);
  CHECK(McaLoss(x, y, {0.0}) == MseLoss(x, y));
  CHECK_THROWS_AS(McaLoss(x, y, {-0.1}), std::invalid_argument);
}

TEST_CASE("mca dominates mse with equality for collinear pairs") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto a = RandomMag(4, 6, rng), b = RandomMag(4, 6, rng);
    CHECK(McaLoss(a, b) > MseLoss(a, b));
    auto scaled = a;
    for (double& v : scaled.Values()) v *= 1.7;
    CHECK(McaLoss(a, scaled) ==
          doctest::Approx(MseLoss(a, scaled)).epsilon(1e-14));
  }
}

TEST_CASE("cossim is invariant to positive scaling") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int i = 0; i < 100; ++i) {
    const auto a = RandomMag(3, 9, rng), b = RandomMag(3, 9, rng);
    auto cb = b;
    const double c = scale(rng);
    for (double& v : cb.Values()) v *= c;
    CHECK(std::abs(CossimLoss(a, cb) - CossimLoss(a, b)) < 1e-10);
  }
}

TEST_CASE("losses are symmetric") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto a = RandomMag(6, 5, rng), b = RandomMag(6, 5, rng);
    CHECK(MseLoss(a, b) == MseLoss(b, a));
    CHECK(CossimLoss(a, b) == doctest::Approx(CossimLoss(b, a)).epsilon(1e-15));
    CHECK(McaLoss(a, b) == doctest::Approx(McaLoss(b, a)).epsilon(1e-15));
  }
}

TEST_CASE("batch loss is the mean over pairs") {
  std::mt19937_64 rng(5);
  std::vector<MagnitudeSpectrogram> a, b;
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    a.push_back(RandomMag(3, 4, rng));
    b.push_back(RandomMag(3, 4, rng));
    sum += McaLoss(a.back(), b.back());
  }
  CHECK(McaLoss(a, b) == doctest::Approx(sum / 4.0).epsilon(1e-15));
  CHECK_THROWS_AS(McaLoss(std::span(a).first(3), std::span(b)),
                  std::invalid_argument);
  CHECK_THROWS_AS(McaLoss(std::span(a).first(0), std::span(b).first(0)),
                  std::invalid_argument);
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(6);
  for (double alpha : {0.0, 0.2, 1.5}) {
    const auto a = RandomMag(4, 5, rng), b = RandomMag(4, 5, rng);
    const LossConfig cfg{alpha};
    const auto grad = McaLossGradient(a, b, cfg);
    REQUIRE(grad.size() == b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double h = 1e-6;
      auto plus = b, minus = b;
      plus.Values()[i] += h;
      minus.Values()[i] -= h;
      const double numeric =
          (McaLoss(a, plus, cfg) - McaLoss(a, minus, cfg)) / (2.0 * h);
      CHECK(std::abs(numeric - grad[i]) <=
            1e-5 * std::max(std::abs(grad[i]), 1e-3));
    }
  }
}

}  // namespace
}  // namespace dsekit
