#pragma once
// Shared oracles and helpers for the test binaries. Everything here is an
// independent reference implementation: closed forms or deliberately naive
// O(M^2) code the fast library paths are checked against.
#include <cmath>
#include <vector>

#include "rollcast/denoiser.hpp"
#include "rollcast/mat.hpp"

namespace testsup {

inline double rel_diff(double a, double b) {
  return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

// Exact solution of the probability-flow ODE for Gaussian data N(mu, sd^2):
// integrating from noise level s0 to s1 scales deviations from the mean by
// sqrt((sd^2 + s1^2) / (sd^2 + s0^2)).
inline double gaussian_ode_endpoint(double x0, double s0, double s1, double sd, double mu = 0.0) {
  return mu + (x0 - mu) * std::sqrt((sd * sd + s1 * s1) / (sd * sd + s0 * s0));
}

// Fair ensemble CRPS by the definition: mean |x_m - y| minus half the mean
// over the M(M-1) ordered pairs of |x_m - x_n|. Quadratic on purpose.
inline double crps_brute(const std::vector<double>& ens, double y) {
  const int m = int(ens.size());
  double t1 = 0.0;
  for (double x : ens) t1 += std::fabs(x - y);
  t1 /= m;
  if (m == 1) return t1;
  double t2 = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) t2 += std::fabs(ens[i] - ens[j]);
  return t1 - t2 / (2.0 * m * (m - 1));
}

// Ideal denoiser when y | cond ~ N(slope * cond, var), applied per channel.
struct ConditionalGaussianOracle : rollcast::ConditionalDenoiser {
  double slope = 0.0;
  double var = 1.0;
  rollcast::Mat denoise_cond(const rollcast::Mat& x, const std::vector<double>& sigma,
                             const rollcast::Vec& cond) const override {
    rollcast::Mat out(x.rows, x.cols);
    for (int w = 0; w < x.rows; ++w) {
      const double g = var / (var + sigma[w] * sigma[w]);
      for (int c = 0; c < x.cols; ++c) {
        const double m = slope * cond[c];
        out(w, c) = m + g * (x(w, c) - m);
      }
    }
    return out;
  }
};

struct CountingCond : rollcast::ConditionalDenoiser {
  const rollcast::ConditionalDenoiser* inner = nullptr;
  mutable long calls = 0;
  rollcast::Mat denoise_cond(const rollcast::Mat& x, const std::vector<double>& sigma,
                             const rollcast::Vec& cond) const override {
    ++calls;
    return inner->denoise_cond(x, sigma, cond);
  }
};

struct CountingDenoiser : rollcast::Denoiser {
  const rollcast::Denoiser* inner = nullptr;
  mutable long calls = 0;
  rollcast::Mat denoise(const rollcast::Mat& x, const std::vector<double>& sigma) const override {
    ++calls;
    return inner->denoise(x, sigma);
  }
};

}  // namespace testsup
