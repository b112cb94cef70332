#include "rollcast/training.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rollcast/noise_prior.hpp"

namespace rollcast {

void AdamW::init(std::size_t n) {
  m.assign(n, 0.0);
  v.assign(n, 0.0);
  t = 0;
}

void AdamW::update(Vec& params, const Vec& grad, double lr) {
  if (params.size() != m.size() || grad.size() != m.size())
    throw std::invalid_argument("adamw: size mismatch");
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, double(t));
  const double bc2 = 1.0 - std::pow(beta2, double(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mh = m[i] / bc1;
    const double vh = v[i] / bc2;
    params[i] -= lr * (mh / (std::sqrt(vh) + eps) + weight_decay * params[i]);
  }
}

double lr_at(const TrainingConfig& cfg, int step) {
  if (step < cfg.warmup) return cfg.lr * (step + 1) / cfg.warmup;
  const int span = cfg.steps > cfg.warmup ? cfg.steps - cfg.warmup : 1;
  const double x = double(step - cfg.warmup) / span;
  return cfg.lr * 0.5 * (1.0 + std::cos(M_PI * x));
}

double clip_global_norm(Vec& grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const double s = max_norm / norm;
    for (double& g : grad) g *= s;
  }
  return norm;
}

double weighted_window_loss(const Mat& y, const Mat& yhat, const std::vector<double>& sigma,
                            const LossWeighting& w, bool use_f) {
  if (!y.same_shape(yhat) || int(sigma.size()) != y.rows)
    throw std::invalid_argument("weighted_window_loss: shape mismatch");
  double loss = 0.0;
  for (int r = 0; r < y.rows; ++r) {
    const double wt =
        w.lambda(sigma[r]) * (use_f ? w.lognormal_pdf(sigma[r]) : 1.0);
    double mse = 0.0;
    for (int c = 0; c < y.cols; ++c) {
      const double e = yhat(r, c) - y(r, c);
      mse += e * e;
    }
    loss += wt * mse / y.cols;
  }
  return loss / y.rows;
}

double eval_rolling_loss(const Denoiser& den, const NoiseSchedule& sched,
                         const LossWeighting& w, const std::vector<WindowSample>& windows,
                         bool use_f, double prior_alpha, Rng& rng) {
  if (windows.empty()) throw std::invalid_argument("eval_rolling_loss: empty window set");
  double total = 0.0;
  for (const WindowSample& s : windows) {
    const int rows = s.target.rows, cols = s.target.cols;
    const double t = randu(rng);
    const std::vector<double> sigma = sched.sigma_vec(t);
    if (int(sigma.size()) != rows)
      throw std::invalid_argument("eval_rolling_loss: window size mismatch");
    ProgressiveNoise prior(prior_alpha, make_rng(rng(), 0));
    Mat eps = prior.sample_window(rows, cols);
    Mat noisy(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) noisy(r, c) = s.target(r, c) + sigma[r] * eps(r, c);
    total += weighted_window_loss(s.target, den.denoise(noisy, sigma), sigma, w, use_f);
  }
  return total / windows.size();
}

Trainer::Trainer(MlpDenoiser& den, const TrainingConfig& cfg, const NoiseSchedule& sched,
                 const LossWeighting& weight, double prior_alpha)
    : den_(den), cfg_(cfg), sched_(sched), weight_(weight), prior_alpha_(prior_alpha) {
  cfg_.validate();
  sched_.validate();
  weight_.validate();
}

void Trainer::init(Rng& rng) {
  den_.init_params(rng);
  params_ = den_.net().flat_params();
  ema_ = params_;
  opt_ = AdamW{};
  opt_.weight_decay = cfg_.weight_decay;
  opt_.init(params_.size());
  step_ = 0;
}

StepInfo Trainer::apply_gradient(double loss, Vec& grad, Rng&) {
  if (!std::isfinite(loss))
    throw std::runtime_error("training: non-finite loss at step " + std::to_string(step_));
  StepInfo info;
  info.loss = loss;
  info.grad_norm = clip_global_norm(grad, cfg_.grad_clip);
  if (!std::isfinite(info.grad_norm))
    throw std::runtime_error("training: non-finite gradient at step " + std::to_string(step_));
  info.lr = lr_at(cfg_, step_);
  opt_.update(params_, grad, info.lr);
  for (std::size_t i = 0; i < ema_.size(); ++i)
    ema_[i] += (1.0 - cfg_.ema_decay) * (params_[i] - ema_[i]);
  ++step_;
  return info;
}

StepInfo Trainer::step_rolling(const std::vector<WindowSample>& batch, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("training: empty batch");
  if (den_.cond_dim() != 0)
    throw std::invalid_argument("training: rolling model must not take conditioning");
  den_.net().set_flat_params(params_);
  const int rows = den_.window(), cols = den_.dim();
  Vec grad(params_.size(), 0.0);
  double loss = 0.0;
  const double denom = double(batch.size()) * rows * cols;
  MlpDenoiser::Tape tape;
  Mat noisy(rows, cols), dLdD(rows, cols);
  std::vector<double> sigma(rows);
  for (const WindowSample& s : batch) {
    if (s.target.rows != rows || s.target.cols != cols)
      throw std::invalid_argument("training: window shape mismatch");
    if (cfg_.randomize_schedule) {
      for (int r = 0; r < rows; ++r) sigma[r] = sched_.raw_sigma(randu(rng) * rows);
    } else {
      sigma = sched_.sigma_vec(randu(rng));
    }
    ProgressiveNoise prior(prior_alpha_, make_rng(rng(), 0));
    const Mat eps = prior.sample_window(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) noisy(r, c) = s.target(r, c) + sigma[r] * eps(r, c);
    const Mat yhat = den_.denoise_tape(noisy, sigma, nullptr, tape);
    for (int r = 0; r < rows; ++r) {
      const double wt =
          weight_.lambda(sigma[r]) * (cfg_.weight_by_f ? weight_.lognormal_pdf(sigma[r]) : 1.0);
      for (int c = 0; c < cols; ++c) {
        const double e = yhat(r, c) - s.target(r, c);
        loss += wt * e * e / denom;
        dLdD(r, c) = 2.0 * wt * e / denom;
      }
    }
    den_.backward(tape, dLdD, grad);
  }
  return apply_gradient(loss, grad, rng);
}

double draw_lognormal_sigma(double p_mean, double p_std, Rng& rng) {
  return std::exp(p_mean + p_std * randn(rng));
}

StepInfo Trainer::step_baseline(const std::vector<WindowSample>& batch, double p_mean,
                                double p_std, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("training: empty batch");
  const int cols = den_.dim();
  if (den_.window() != 1 || den_.cond_dim() != cols)
    throw std::invalid_argument(
        "training: baseline model must have window 1 and condition on one snapshot");
  den_.net().set_flat_params(params_);
  Vec grad(params_.size(), 0.0);
  double loss = 0.0;
  const double denom = double(batch.size()) * cols;
  MlpDenoiser::Tape tape;
  Mat noisy(1, cols), dLdD(1, cols);
  for (const WindowSample& s : batch) {
    if (s.target.rows != 1 || s.target.cols != cols || int(s.y0.size()) != cols)
      throw std::invalid_argument("training: baseline pair shape mismatch");
    const double sig = draw_lognormal_sigma(p_mean, p_std, rng);
    for (int c = 0; c < cols; ++c) noisy(0, c) = s.target(0, c) + sig * randn(rng);
    const Mat yhat = den_.denoise_tape(noisy, {sig}, &s.y0, tape);
    const double wt = weight_.lambda(sig);
    for (int c = 0; c < cols; ++c) {
      const double e = yhat(0, c) - s.target(0, c);
      loss += wt * e * e / denom;
      dLdD(0, c) = 2.0 * wt * e / denom;
    }
    den_.backward(tape, dLdD, grad);
  }
  return apply_gradient(loss, grad, rng);
}

void Trainer::use_ema() { den_.net().set_flat_params(ema_); }
void Trainer::use_raw() { den_.net().set_flat_params(params_); }

}  // namespace rollcast
