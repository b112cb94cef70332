#include "rollcast/weighting.hpp"

#include <cmath>
#include <stdexcept>

namespace rollcast {

void LossWeighting::validate() const {
  if (!(p_std > 0.0)) throw std::invalid_argument("weighting.p_std must be > 0");
  if (!(sigma_data > 0.0)) throw std::invalid_argument("weighting.sigma_data must be > 0");
  if (!std::isfinite(p_mean)) throw std::invalid_argument("weighting.p_mean must be finite");
}

static void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("weighting: sigma must be finite and > 0");
}

double LossWeighting::lambda(double sigma) const {
  check_sigma(sigma);
  const double s2 = sigma * sigma, d2 = sigma_data * sigma_data;
  return (s2 + d2) / (s2 * d2);
}

double LossWeighting::lognormal_pdf(double sigma) const {
  check_sigma(sigma);
  const double z = (std::log(sigma) - p_mean) / p_std;
  return std::exp(-0.5 * z * z) / (sigma * p_std * std::sqrt(2.0 * M_PI));
}

double LossWeighting::snapshot_weight(double sigma) const {
  return lambda(sigma) * lognormal_pdf(sigma);
}

}  // namespace rollcast
