#pragma once

namespace rollcast {

// Per-snapshot loss weighting: the EDM weight lambda(sigma) times a lognormal
// density f(sigma) that concentrates training effort at mid noise levels.
struct LossWeighting {
  double p_mean = 0.5;
  double p_std = 1.2;
  double sigma_data = 1.0;

  void validate() const;  // throws std::invalid_argument naming the bad field

  double lambda(double sigma) const;         // (sigma^2 + sd^2) / (sigma * sd)^2
  double lognormal_pdf(double sigma) const;  // density of ln sigma ~ N(p_mean, p_std^2)
  double snapshot_weight(double sigma) const;
};

}  // namespace rollcast
