#include "rollcast/noise_prior.hpp"

#include <cmath>
#include <stdexcept>

namespace rollcast {

ProgressiveNoise::ProgressiveNoise(double alpha, Rng rng) : alpha_(alpha), rng_(rng) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("noise_prior.alpha must be finite and >= 0");
}

Mat ProgressiveNoise::sample_window(int n, int dim) {
  if (n < 1 || dim < 1) throw std::invalid_argument("sample_window: n and dim must be >= 1");
  Mat eps(n, dim);
  for (int c = 0; c < dim; ++c) eps(0, c) = randn(rng_);
  const double carry = alpha_ / std::sqrt(1.0 + alpha_ * alpha_);
  const double fresh = 1.0 / std::sqrt(1.0 + alpha_ * alpha_);
  for (int k = 1; k < n; ++k)
    for (int c = 0; c < dim; ++c) eps(k, c) = carry * eps(k - 1, c) + fresh * randn(rng_);
  last_.assign(eps.row(n - 1), eps.row(n - 1) + dim);
  return eps;
}

Vec ProgressiveNoise::sample_next(int dim) {
  if (last_.empty()) throw std::logic_error("sample_next: no chain started");
  if (int(last_.size()) != dim)
    throw std::invalid_argument("sample_next: dim does not match the running chain");
  const double carry = alpha_ / std::sqrt(1.0 + alpha_ * alpha_);
  const double fresh = 1.0 / std::sqrt(1.0 + alpha_ * alpha_);
  Vec eps(dim);
  for (int c = 0; c < dim; ++c) eps[c] = carry * last_[c] + fresh * randn(rng_);
  last_ = eps;
  return eps;
}

}  // namespace rollcast
