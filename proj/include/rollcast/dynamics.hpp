#pragma once
#include <cmath>

#include "rollcast/mat.hpp"
#include "rollcast/rng.hpp"

namespace rollcast {

enum class SystemKind { lorenz63, lorenz96, ou };

struct SystemSpec {
  SystemKind kind = SystemKind::lorenz63;
  int dim = 3;       // fixed at 3 for lorenz63
  double dt = 0.01;  // integrator step
  int stride = 10;   // observe every `stride` integrator steps
  int burn_in = 1000;
  double forcing = 8.0;                  // lorenz96
  double theta = 1.0;                    // ou mean reversion
  double ou_noise = std::sqrt(2.0);      // ou diffusion; stationary var = noise^2 / (2 theta)

  void validate() const;
  double obs_dt() const { return dt * stride; }
};

// Returns n_obs observed snapshots (n_obs x dim). Deterministic systems are
// integrated with RK4 at spec.dt from a randomly jittered start; the OU
// system uses its exact discrete transition from a stationary draw. rng
// drives the start (and, for OU, the path).
Mat simulate(const SystemSpec& spec, int n_obs, Rng& rng);

// Analytic k-observation-ahead predictive law of the OU system.
struct GaussLaw {
  Vec mean;
  double var = 0.0;
};
GaussLaw ou_predictive(const SystemSpec& spec, const Vec& y0, int k);

// Per-channel affine standardization fitted on training data. A constant
// channel keeps scale 1 so apply/invert stay well defined.
struct Standardizer {
  Vec mean, std;
  void fit(const Mat& data);
  Mat apply(const Mat& data) const;
  Mat invert(const Mat& data) const;
};

// A training window: `window` consecutive snapshots plus the snapshot
// immediately before them as conditioning context.
struct WindowSample {
  Vec y0;
  Mat target;  // window x dim
};
int window_count(int n_obs, int window);  // windows with a preceding snapshot
WindowSample make_window(const Mat& traj, int window, int start);  // start >= 1
WindowSample random_window(const Mat& traj, int window, Rng& rng);

}  // namespace rollcast
