#pragma once
#include "rollcast/mat.hpp"
#include "rollcast/rng.hpp"

namespace rollcast {

// Temporally correlated unit-variance noise: snapshot k of a chain carries
//   eps_k = a/sqrt(1+a^2) * eps_{k-1} + eta_k,   eta_k ~ N(0, 1/(1+a^2) I)
// so every marginal stays exactly N(0, I) while adjacent snapshots correlate
// at a/sqrt(1+a^2). alpha = 0 recovers independent noise. One chain runs per
// ensemble member for a whole rollout: the initial window, the pad slots, and
// every appended slot continue the same recursion in slot order.
class ProgressiveNoise {
 public:
  ProgressiveNoise(double alpha, Rng rng);

  Mat sample_window(int n, int dim);  // starts a fresh chain of n snapshots
  Vec sample_next(int dim);           // appends one snapshot to the chain

  double alpha() const { return alpha_; }

 private:
  double alpha_;
  Rng rng_;
  Vec last_;
};

}  // namespace rollcast
