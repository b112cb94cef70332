#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rollcast/weighting.hpp"

using rollcast::LossWeighting;

TEST_CASE("defaults") {
  LossWeighting w;
  CHECK(w.p_mean == 0.5);
  CHECK(w.p_std == 1.2);
  CHECK(w.sigma_data == 1.0);
  w.validate();
}

TEST_CASE("lambda closed forms") {
  LossWeighting w;
  w.p_mean = 0.0;
  w.p_std = 1.0;
  CHECK(w.lambda(1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(w.lambda(2.0) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(w.lambda(1e8) == doctest::Approx(1.0).epsilon(1e-7));  // -> 1/sd^2
  LossWeighting v = w;
  v.sigma_data = 2.0;
  CHECK(v.lambda(2.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(v.lambda(1e8) == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("lognormal density values") {
  LossWeighting w;
  w.p_mean = 0.0;
  w.p_std = 1.0;
  // 1/sqrt(2 pi) at sigma = 1, high-precision reference.
  CHECK(w.lognormal_pdf(1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  LossWeighting d;  // default 0.5 / 1.2 at sigma = e^{p_mean}
  CHECK(d.lognormal_pdf(std::exp(0.5)) == doctest::Approx(0.20164227043261946).epsilon(1e-14));
}

TEST_CASE("density integrates to one") {
  // Simpson on u = ln(sigma); the substituted integrand f(e^u) e^u is the
  // plain normal density, so the truncation window is easy to bound.
  auto integral = [](double pm, double ps) {
    LossWeighting w;
    w.p_mean = pm;
    w.p_std = ps;
    const double lo = pm - 9 * ps, hi = pm + 9 * ps;
    const int n = 4000;  // even
    const double h = (hi - lo) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double u = lo + i * h;
      const double g = w.lognormal_pdf(std::exp(u)) * std::exp(u);
      acc += g * ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return acc * h / 3.0;
  };
  CHECK(integral(0.5, 1.2) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(integral(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(integral(-1.2, 1.2) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("snapshot weight product") {
  LossWeighting w;
  w.p_mean = 0.0;
  w.p_std = 1.0;
  CHECK(w.snapshot_weight(1.0) == doctest::Approx(0.7978845608028654).epsilon(1e-13));
}

TEST_CASE("positive and finite across the working range") {
  LossWeighting w;
  for (double lg = -4.0; lg <= 4.0; lg += 0.125) {
    const double s = std::pow(10.0, lg);
    const double f = w.snapshot_weight(s);
    CHECK(std::isfinite(f));
    CHECK(f > 0.0);
  }
}

TEST_CASE("validation errors name the field") {
  LossWeighting w;
  w.p_std = 0.0;
  CHECK_THROWS_WITH_AS(w.validate(), "weighting.p_std must be > 0", std::invalid_argument);
  LossWeighting v;
  v.sigma_data = -2.0;
  CHECK_THROWS_WITH_AS(v.validate(), "weighting.sigma_data must be > 0", std::invalid_argument);
  CHECK_THROWS_AS(w.lambda(0.0), std::invalid_argument);
  CHECK_THROWS_AS(w.lognormal_pdf(-1.0), std::invalid_argument);
}
