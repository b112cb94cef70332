#pragma once
#include <vector>

namespace rollcast {

// Per-snapshot noise schedule for a rolling window of `window` snapshots.
// Snapshot w (1-based) at window time t in [0, 1] sits at
//   sigma_bar_w(t) = (smax^(1/rho) + t_wt * (smin^(1/rho) - smax^(1/rho)))^rho
//   t_wt = 1 - (w - t) / window
// Snapshot 1 is nearly clean, snapshot `window` is pure noise. Advancing t
// from 0 to 1 slides every snapshot one position toward clean, so
// sigma_bar_w(1) == sigma_bar_{w-1}(0) and the per-snapshot segments tile
// [sigma_min, sigma_max] end to end.
struct NoiseSchedule {
  double sigma_min = 0.002;
  double sigma_max = 200.0;
  double rho = -10.0;
  int window = 6;

  void validate() const;  // throws std::invalid_argument naming the bad field

  double sigma_bar(int w, double t) const;  // requires 1 <= w <= window, 0 <= t <= 1
  double sigma_dot(int w, double t) const;  // d sigma_bar_w / dt, always negative
  std::vector<double> sigma_vec(double t) const;

  // Closed form as a function of u = w - t alone. Accepts any u the sampler
  // can reach, including u < 0 (a snapshot the window has slid past keeps
  // following the curve below sigma_min; the stochastic sampler's churn term
  // needs those extrapolated levels).
  double raw_sigma(double u) const;

  // Noise levels for a padded sampler buffer of n slots at global time t >= 0.
  // Slots beyond the active window are pure noise at sigma_max.
  std::vector<double> padded_sigma(double t, int n) const;
};

}  // namespace rollcast
