#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rollcast/precondition.hpp"
#include "rollcast/rng.hpp"

using rollcast::Mat;
using rollcast::Preconditioner;

TEST_CASE("closed-form values") {
  Preconditioner p;  // sigma_data = 1
  CHECK(p.c_skip(1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.c_out(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(p.c_in(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(p.c_in(2.0) == doctest::Approx(0.4472135954999579).epsilon(1e-14));
  CHECK(p.c_skip(2.0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(p.c_out(2.0) == doctest::Approx(0.8944271909999159).epsilon(1e-14));
  CHECK(p.c_noise(1.0) == 0.0);
  CHECK(p.c_noise(std::exp(1.0)) == doctest::Approx(0.25).epsilon(1e-14));

  Preconditioner q;
  q.sigma_data = 1.7;  // at sigma == sigma_data the skip and out paths balance
  CHECK(q.c_skip(1.7) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q.c_out(1.7) == doctest::Approx(1.7 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("zero-noise limit keeps the input") {
  Preconditioner p;
  CHECK(p.c_skip(1e-8) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.c_out(1e-8) == doctest::Approx(1e-8).epsilon(1e-12));
  // With any bounded raw net the denoiser output collapses onto the input.
  auto raw = [](const Mat& x, const std::vector<double>&) {
    Mat f(x.rows, x.cols, 3.0);
    return f;
  };
  Mat win(2, 3);
  for (int i = 0; i < 6; ++i) win.v[i] = 0.5 * i - 1.0;
  Mat out = rollcast::apply_denoiser(p, raw, win, {1e-10, 1e-10});
  for (int i = 0; i < 6; ++i) CHECK(out.v[i] == doctest::Approx(win.v[i]).epsilon(1e-8));
}

TEST_CASE("zero raw network leaves only the skip path") {
  Preconditioner p;
  auto raw = [](const Mat& x, const std::vector<double>&) { return Mat(x.rows, x.cols, 0.0); };
  Mat win(3, 2);
  for (int i = 0; i < 6; ++i) win.v[i] = i - 2.5;
  std::vector<double> sigma = {0.1, 1.0, 30.0};
  Mat out = rollcast::apply_denoiser(p, raw, win, sigma);
  for (int w = 0; w < 3; ++w)
    for (int c = 0; c < 2; ++c)
      CHECK(out(w, c) == doctest::Approx(p.c_skip(sigma[w]) * win(w, c)).epsilon(1e-14));
}

TEST_CASE("recovers an analytic posterior mean routed through the raw net") {
  // For Gaussian data N(mu, sd^2) the ideal denoiser is
  //   mu + sd^2/(sd^2 + s^2) (x - mu).
  // Express it through the preconditioned parameterization and check the
  // wrapper reassembles it to machine precision.
  const double mu = 0.4;
  Preconditioner p;
  auto oracle = [&](double x, double s) {
    return mu + (x - mu) / (1.0 + s * s / (p.sigma_data * p.sigma_data));
  };
  std::vector<double> sigma = {0.05, 0.9, 7.0, 180.0};
  auto raw = [&](const Mat& xs, const std::vector<double>& emb) {
    Mat f(xs.rows, xs.cols);
    for (int w = 0; w < xs.rows; ++w) {
      const double s = std::exp(4.0 * emb[w]);  // invert c_noise
      for (int c = 0; c < xs.cols; ++c) {
        const double x = xs(w, c) / p.c_in(s);
        f(w, c) = (oracle(x, s) - p.c_skip(s) * x) / p.c_out(s);
      }
    }
    return f;
  };
  Mat win(4, 2);
  for (int i = 0; i < 8; ++i) win.v[i] = 0.7 * i - 2.0;
  Mat out = rollcast::apply_denoiser(p, raw, win, sigma);
  for (int w = 0; w < 4; ++w)
    for (int c = 0; c < 2; ++c)
      CHECK(out(w, c) == doctest::Approx(oracle(win(w, c), sigma[w])).epsilon(1e-11));
}

TEST_CASE("scaled network input has unit variance") {
  Preconditioner p;
  rollcast::Rng rng = rollcast::make_rng(5);
  for (double s : {0.01, 1.0, 50.0}) {
    double acc = 0.0, acc2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const double y = rollcast::randn(rng);  // sigma_data = 1 data draw
      const double x = p.c_in(s) * (y + s * rollcast::randn(rng));
      acc += x;
      acc2 += x * x;
    }
    const double var = acc2 / n - (acc / n) * (acc / n);
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("ideal raw-net target has unit variance") {
  Preconditioner p;
  rollcast::Rng rng = rollcast::make_rng(6);
  for (double s : {0.1, 1.0, 10.0}) {
    double acc2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const double y = rollcast::randn(rng);
      const double xbar = y + s * rollcast::randn(rng);
      const double target = (y - p.c_skip(s) * xbar) / p.c_out(s);
      acc2 += target * target;
    }
    CHECK(acc2 / n == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("errors") {
  Preconditioner p;
  CHECK_THROWS_AS(p.c_in(0.0), std::invalid_argument);
  CHECK_THROWS_AS(p.c_skip(-1.0), std::invalid_argument);
  auto raw = [](const Mat& x, const std::vector<double>&) { return Mat(x.rows, x.cols); };
  Mat win(3, 2);
  CHECK_THROWS_AS(rollcast::apply_denoiser(p, raw, win, {1.0, 2.0}), std::invalid_argument);
  auto bad_raw = [](const Mat&, const std::vector<double>&) { return Mat(1, 1); };
  CHECK_THROWS_AS(rollcast::apply_denoiser(p, bad_raw, win, {1.0, 1.0, 1.0}),
                  std::invalid_argument);
}
