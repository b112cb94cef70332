#pragma once
#include <vector>

#include "rollcast/config_io.hpp"
#include "rollcast/denoiser.hpp"
#include "rollcast/dynamics.hpp"
#include "rollcast/mat.hpp"
#include "rollcast/rng.hpp"
#include "rollcast/schedule.hpp"
#include "rollcast/weighting.hpp"

namespace rollcast {

// Adaptive-moment optimizer with decoupled weight decay over a flat
// parameter vector.
struct AdamW {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double weight_decay = 0.0;
  Vec m, v;
  long t = 0;
  void init(std::size_t n);
  void update(Vec& params, const Vec& grad, double lr);
};

// Linear warmup to the peak rate, then cosine decay to zero.
double lr_at(const TrainingConfig& cfg, int step);

// Scales grad down to max_norm if it exceeds it; returns the pre-clip norm.
double clip_global_norm(Vec& grad, double max_norm);

// Noise level draw for the one-step baseline: ln(sigma) ~ N(p_mean, p_std^2).
double draw_lognormal_sigma(double p_mean, double p_std, Rng& rng);

// Mean over snapshots of weight(sigma_w) times the per-channel mean squared
// error; weight is lambda * f, or lambda alone when use_f is false.
double weighted_window_loss(const Mat& y, const Mat& yhat, const std::vector<double>& sigma,
                            const LossWeighting& w, bool use_f);

// Average weighted loss of a denoiser over freshly noised windows drawn from
// the rolling schedule; evaluation only, no gradients.
double eval_rolling_loss(const Denoiser& den, const NoiseSchedule& sched,
                         const LossWeighting& w, const std::vector<WindowSample>& windows,
                         bool use_f, double prior_alpha, Rng& rng);

struct StepInfo {
  double loss = 0.0, lr = 0.0, grad_norm = 0.0;
};

// Owns the flat parameters, their exponential moving average, and the
// optimizer state for one denoiser network. The network object is used as
// the forward/backward engine; its internal parameters are overwritten on
// every step and on use_ema()/use_raw().
class Trainer {
 public:
  Trainer(MlpDenoiser& den, const TrainingConfig& cfg, const NoiseSchedule& sched,
          const LossWeighting& weight, double prior_alpha);

  void init(Rng& rng);

  // One optimizer update on clean rolling windows (window x dim targets).
  StepInfo step_rolling(const std::vector<WindowSample>& batch, Rng& rng);
  // One update for the one-step conditional baseline: 1 x dim targets,
  // noise level drawn with ln(sigma) ~ N(p_mean, p_std^2), no density factor.
  StepInfo step_baseline(const std::vector<WindowSample>& batch, double p_mean, double p_std,
                         Rng& rng);

  const Vec& params() const { return params_; }
  const Vec& ema() const { return ema_; }
  int steps_done() const { return step_; }
  void use_ema();  // push EMA parameters into the network
  void use_raw();

 private:
  StepInfo apply_gradient(double loss, Vec& grad, Rng& rng);

  MlpDenoiser& den_;
  TrainingConfig cfg_;
  NoiseSchedule sched_;
  LossWeighting weight_;
  double prior_alpha_;
  Vec params_, ema_;
  AdamW opt_;
  int step_ = 0;
};

}  // namespace rollcast
