#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rollcast/metrics.hpp"
#include "rollcast/rng.hpp"
#include "support.hpp"

using namespace rollcast;

TEST_CASE("fair crps: hand-worked ensembles") {
  CHECK(crps_fair({0.0, 1.0}, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(crps_fair({1.0, 2.0, 4.0}, 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  // A collapsed ensemble scores the absolute error.
  CHECK(crps_fair({2.0, 2.0, 2.0}, 5.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK_THROWS_AS(crps_fair({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("fair crps: sorted fast path matches the quadratic formula") {
  auto rng = make_rng(101, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 2 + static_cast<int>(randu(rng) * 39);
    Vec ens(m);
    for (double& e : ens) e = 3.0 * randn(rng);
    const double y = 2.0 * randn(rng);
    const double fast = crps_fair(ens, y);
    const double brute = testsup::crps_brute(ens, y);
    CHECK(std::abs(fast - brute) < 1e-12 * (1.0 + std::abs(brute)));
  }
}

TEST_CASE("gaussian crps: frozen closed-form values") {
  CHECK(crps_gaussian(0.0, 1.0, 0.3) == doctest::Approx(0.26933290068666347).epsilon(1e-14));
  CHECK(crps_gaussian(1.0, 2.0, -0.5) == doctest::Approx(0.89628850439310045).epsilon(1e-14));
  CHECK(crps_gaussian(4.0, 0.0, 1.5) == 2.5);
  CHECK_THROWS_AS(crps_gaussian(0.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("fair crps is unbiased in ensemble size and attains 1/sqrt(pi) when ideal") {
  auto rng = make_rng(55, 0);
  const double ideal = 1.0 / std::sqrt(M_PI);
  for (int m : {2, 100}) {
    double acc = 0.0;
    const int trials = 20000;
    Vec ens(m);
    for (int t = 0; t < trials; ++t) {
      for (double& e : ens) e = randn(rng);
      acc += crps_fair(ens, randn(rng));
    }
    acc /= trials;
    CHECK(std::abs(acc - ideal) < 0.015);  // ~4 standard errors at 20k trials
  }
}

TEST_CASE("large ideal ensemble approaches the gaussian closed form") {
  auto rng = make_rng(56, 0);
  const int m = 4000;
  Vec ens(m);
  for (double& e : ens) e = 2.0 + 0.5 * randn(rng);
  for (double y : {1.7, 2.0, 3.1})
    CHECK(std::abs(crps_fair(ens, y) - crps_gaussian(2.0, 0.5, y)) < 0.01);
}

TEST_CASE("field crps averages channels with weights") {
  Mat ens(2, 2);
  ens(0, 0) = 0.0;
  ens(1, 0) = 1.0;  // channel 0: {0,1} vs 0.5 -> 0
  ens(0, 1) = 2.0;
  ens(1, 1) = 2.0;  // channel 1: collapsed at 2 vs 3 -> 1
  Vec obs = {0.5, 3.0};
  CHECK(crps_field(ens, obs) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(crps_field(ens, obs, {3.0, 1.0}) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(crps_field(ens, {1.0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(crps_field(ens, obs, {1.0}), std::invalid_argument);
}

TEST_CASE("ensemble stats: hand-worked spread, error, and corrected ratio") {
  Mat ens(2, 1);
  ens(0, 0) = 0.0;
  ens(1, 0) = 2.0;
  EnsembleStats st = ensemble_stats(ens, {2.0});
  CHECK(st.rmse == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(st.spread == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(st.ssr == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));

  Mat ens2(2, 2);
  ens2(0, 0) = 0.0;
  ens2(1, 0) = 2.0;
  ens2(0, 1) = 0.0;
  ens2(1, 1) = 4.0;
  EnsembleStats w = ensemble_stats(ens2, {2.0, 1.0}, {3.0, 1.0});
  CHECK(w.rmse == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.spread == doctest::Approx(std::sqrt(3.5)).epsilon(1e-14));
  CHECK(w.ssr == doctest::Approx(std::sqrt(1.5 * 3.5)).epsilon(1e-14));
}

TEST_CASE("accumulated ssr equals stats on the pooled fields") {
  auto rng = make_rng(77, 0);
  SsrAccumulator acc;
  double err2 = 0.0, var = 0.0;
  const int m = 5, d = 3, steps = 4;
  for (int s = 0; s < steps; ++s) {
    Mat ens(m, d);
    Vec obs(d);
    for (int c = 0; c < d; ++c) {
      obs[c] = randn(rng);
      for (int r = 0; r < m; ++r) ens(r, c) = randn(rng);
    }
    acc.add(ens, obs);
    EnsembleStats st = ensemble_stats(ens, obs);
    err2 += st.rmse * st.rmse * d;
    var += st.spread * st.spread * d;
  }
  CHECK(acc.rmse() == doctest::Approx(std::sqrt(err2 / (steps * d))).epsilon(1e-12));
  CHECK(acc.spread() == doctest::Approx(std::sqrt(var / (steps * d))).epsilon(1e-12));
  CHECK(acc.ssr() ==
        doctest::Approx(std::sqrt(6.0 / 5.0) * acc.spread() / acc.rmse()).epsilon(1e-12));
}

TEST_CASE("a calibrated ensemble scores a spread/error ratio near one") {
  auto rng = make_rng(78, 0);
  SsrAccumulator acc;
  const int m = 20;
  for (int t = 0; t < 20000; ++t) {
    Mat ens(m, 1);
    for (int r = 0; r < m; ++r) ens(r, 0) = randn(rng);
    acc.add(ens, {randn(rng)});
  }
  CHECK(std::abs(acc.ssr() - 1.0) < 0.02);
}

TEST_CASE("skill score sign convention") {
  CHECK(skill_score(0.5, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(skill_score(1.2, 1.0) == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK_THROWS_AS(skill_score(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("latitude weights: mean one, symmetric, heaviest at the equator") {
  Vec one = latitude_weights(1);
  CHECK(one.size() == 1);
  CHECK(one[0] == doctest::Approx(1.0).epsilon(1e-15));

  Vec w = latitude_weights(4);
  CHECK(w[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(w[2]).epsilon(1e-14));
  CHECK(w[0] == doctest::Approx(w[3]).epsilon(1e-14));

  Vec big = latitude_weights(37);
  double sum = 0.0;
  for (double v : big) sum += v;
  CHECK(sum == doctest::Approx(37.0).epsilon(1e-12));
  CHECK(big[18] > big[0]);
}

TEST_CASE("power spectrum concentrates a pure tone and satisfies the energy identity") {
  const int n = 32;
  Vec x(n);
  for (int t = 0; t < n; ++t) x[t] = std::cos(2.0 * M_PI * 3.0 * t / n);
  Vec s = power_spectrum(x);
  CHECK(static_cast<int>(s.size()) == n / 2 + 1);
  CHECK(s[3] == doctest::Approx(n / 2.0).epsilon(1e-12));
  for (int k = 0; k < static_cast<int>(s.size()); ++k)
    if (k != 3) CHECK(std::abs(s[k]) < 1e-10);

  Vec c(n, 2.5);  // constant series: all energy at frequency zero
  Vec sc = power_spectrum(c);
  CHECK(sc[0] == doctest::Approx(n * 2.5 * 2.5).epsilon(1e-12));

  auto rng = make_rng(99, 0);
  for (int len : {16, 17, 256}) {
    Vec r(len);
    double energy = 0.0;
    for (double& v : r) {
      v = randn(rng);
      energy += v * v;
    }
    Vec sr = power_spectrum(r);
    double total = 0.0;
    for (double v : sr) total += v;
    CHECK(total == doctest::Approx(energy).epsilon(1e-10));
  }
}
