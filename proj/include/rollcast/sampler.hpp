#pragma once
#include <functional>
#include <vector>

#include "rollcast/denoiser.hpp"
#include "rollcast/noise_prior.hpp"
#include "rollcast/schedule.hpp"

namespace rollcast {

enum class SolverOrder { euler, heun };

struct SamplerConfig {
  double steps_per_snapshot = 1.25;  // solver steps per emitted snapshot; dt = 1/N
  SolverOrder order = SolverOrder::heun;
  double s_churn = 0.0;  // fraction of each step re-noised afterwards
  double s_noise = 1.0;  // scale of the churn noise
  double alpha = 1.0;    // temporal correlation knob of the noise prior
  double divergence_bound = 1e9;

  void validate() const;
};

struct TraceRow {
  int iter = 0;
  double t_cur = 0.0, t_next = 0.0;
  int n_clean = 0;
  std::vector<double> sigma;  // slot levels at the start of the iteration
};
using TraceFn = std::function<void(const TraceRow&)>;

// Rolling window sampler. The buffer holds the W active snapshots plus, for
// the stochastic solver, enough pure-noise pad slots for the overshooting
// corrector step. Each step() advances window time by dt, emits the snapshots
// whose time crossed an integer boundary (taking them from the denoised
// estimate of the step's first denoiser call), drops them from the buffer and
// appends fresh sigma_max noise from the member's progressive chain.
class RollingSampler {
 public:
  RollingSampler(const Denoiser& den, const NoiseSchedule& sched, const SamplerConfig& cfg,
                 int dim, Rng rng);

  // Corrupts per-snapshot clean estimates (window x dim) with the schedule's
  // t=0 noise levels and fills the pad with pure noise.
  void init_from_estimates(const Mat& y_init);
  // Test hook: adopt an already-corrupted buffer as the t = 0 state. The
  // noise chain is advanced exactly as in init_from_estimates so later
  // appends stay well defined.
  void init_from_state(const Mat& buffer);

  // One solver substep without the shift; advances t by dt and returns the
  // first denoiser call's estimate for the whole buffer.
  Mat substep();
  // Emission/bookkeeping for the crossed integer boundary, if any.
  void shift();
  void step();
  void run(int horizon);  // steps until at least `horizon` snapshots emitted

  double t_cur() const { return t_; }
  const Mat& buffer() const { return buf_; }
  int emitted_count() const { return int(emitted_.size()); }
  Mat emitted() const;
  void set_trace(TraceFn fn) { trace_ = std::move(fn); }

 private:
  void check_bookkeeping() const;
  void check_divergence(int iter) const;

  const Denoiser& den_;
  NoiseSchedule sched_;
  SamplerConfig cfg_;
  int dim_ = 0, n_pad_ = 0, iter_ = 0;
  double t_ = 0.0;
  Mat buf_;
  Mat last_est_;
  std::vector<double> slot_sigma_;
  ProgressiveNoise prior_;
  Rng churn_rng_;
  std::vector<Vec> emitted_;
  TraceFn trace_;
  bool ready_ = false;
};

// Convenience wrappers returning exactly `horizon` emitted snapshots.
Mat rolling_rollout(const Denoiser& den, const NoiseSchedule& sched, const SamplerConfig& cfg,
                    const Mat& y_init, int horizon, Rng rng, TraceFn trace = {});
Mat euler_rollout(const Denoiser& den, const NoiseSchedule& sched, SamplerConfig cfg,
                  const Mat& y_init, int horizon, Rng rng);
Mat heun_rollout(const Denoiser& den, const NoiseSchedule& sched, SamplerConfig cfg,
                 const Mat& y_init, int horizon, Rng rng);

// One-step-ahead baseline: deterministic Euler-plus-correction integration of
// a single-segment schedule (window == 1) from pure sigma_max noise down to
// sigma_min, conditioned on the previous snapshot. Consumes exactly `dim`
// normals from rng for the initial noise; 2 * n_steps denoiser calls.
Vec edm_baseline_sample(const ConditionalDenoiser& den, const Vec& y0, const NoiseSchedule& seg,
                        int n_steps, Rng& rng);
Mat edm_baseline_rollout(const ConditionalDenoiser& den, const Vec& y0, const NoiseSchedule& seg,
                         int n_steps, int horizon, Rng& rng);

}  // namespace rollcast
