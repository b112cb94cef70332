#include "rollcast/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rollcast {

void SamplerConfig::validate() const {
  if (!(steps_per_snapshot > 0.0) || !std::isfinite(steps_per_snapshot))
    throw std::invalid_argument("sampler.steps_per_snapshot must be finite and > 0");
  if (!(s_churn >= 0.0 && s_churn < 1.0))
    throw std::invalid_argument("sampler.s_churn must be in [0, 1)");
  if (order == SolverOrder::euler && s_churn != 0.0)
    throw std::invalid_argument("sampler.s_churn requires the heun solver");
  if (!(s_noise > 0.0)) throw std::invalid_argument("sampler.s_noise must be > 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("sampler.alpha must be >= 0");
  if (!(divergence_bound > 0.0))
    throw std::invalid_argument("sampler.divergence_bound must be > 0");
}

RollingSampler::RollingSampler(const Denoiser& den, const NoiseSchedule& sched,
                               const SamplerConfig& cfg, int dim, Rng rng)
    : den_(den), sched_(sched), cfg_(cfg), dim_(dim),
      prior_(cfg.alpha, make_rng(rng(), 1)), churn_rng_(make_rng(rng(), 2)) {
  sched.validate();
  cfg.validate();
  if (dim < 1) throw std::invalid_argument("sampler: dim must be >= 1");
  const double dt = 1.0 / cfg_.steps_per_snapshot;
  const double dtp = dt / (1.0 - cfg_.s_churn);
  n_pad_ = (cfg_.order == SolverOrder::heun) ? int(std::floor(dtp)) + 1 : 0;
  if (dt > sched_.window)
    throw std::invalid_argument("sampler: dt may not exceed the window length");
}

void RollingSampler::init_from_estimates(const Mat& y_init) {
  if (y_init.rows != sched_.window || y_init.cols != dim_)
    throw std::invalid_argument("sampler init: estimates must be window x dim");
  const int len = sched_.window + n_pad_;
  Mat eps = prior_.sample_window(len, dim_);
  slot_sigma_ = sched_.padded_sigma(0.0, len);
  buf_ = Mat(len, dim_);
  for (int w = 0; w < len; ++w)
    for (int c = 0; c < dim_; ++c) {
      const double clean = (w < sched_.window) ? y_init(w, c) : 0.0;
      buf_(w, c) = clean + slot_sigma_[w] * eps(w, c);
    }
  t_ = 0.0;
  iter_ = 0;
  emitted_.clear();
  ready_ = true;
}

void RollingSampler::init_from_state(const Mat& buffer) {
  if (buffer.rows < sched_.window + n_pad_ || buffer.cols != dim_)
    throw std::invalid_argument("sampler init: buffer too small for window plus pad");
  prior_.sample_window(buffer.rows, dim_);  // advance the chain as usual
  buf_ = buffer;
  slot_sigma_ = sched_.padded_sigma(0.0, buffer.rows);
  t_ = 0.0;
  iter_ = 0;
  emitted_.clear();
  ready_ = true;
}

void RollingSampler::check_bookkeeping() const {
  const auto expect = sched_.padded_sigma(t_, buf_.rows);
  for (int i = 0; i < buf_.rows; ++i) {
    const double scale = std::max(std::fabs(expect[i]), std::fabs(slot_sigma_[i]));
    if (std::fabs(expect[i] - slot_sigma_[i]) > 1e-9 * scale)
      throw std::logic_error("sampler bookkeeping: slot noise levels drifted from the schedule");
  }
}

void RollingSampler::check_divergence(int iter) const {
  for (double v : buf_.v)
    if (!(std::fabs(v) <= cfg_.divergence_bound))
      throw std::runtime_error("sampler diverged at iteration " + std::to_string(iter) +
                               " (|state| > " + std::to_string(cfg_.divergence_bound) + ")");
}

Mat RollingSampler::substep() {
  if (!ready_) throw std::logic_error("sampler: not initialized");
  const int len = buf_.rows;
  const double dt = 1.0 / cfg_.steps_per_snapshot;
  const double t_next = t_ + dt;
  const auto sig_cur = sched_.padded_sigma(t_, len);
  const auto sig_next = sched_.padded_sigma(t_next, len);

  last_est_ = padded_denoise(den_, sched_, buf_, t_);
  Mat d(len, dim_);
  for (int w = 0; w < len; ++w)
    for (int c = 0; c < dim_; ++c) d(w, c) = (buf_(w, c) - last_est_(w, c)) / sig_cur[w];

  if (cfg_.order == SolverOrder::euler) {
    for (int w = 0; w < len; ++w)
      for (int c = 0; c < dim_; ++c) buf_(w, c) += (sig_next[w] - sig_cur[w]) * d(w, c);
  } else {
    // Overshoot to t' = t + dt/(1 - s_churn), correct, then churn the noise
    // level back up to sigma(t_next).
    const double t_over = t_ + dt / (1.0 - cfg_.s_churn);
    const auto sig_over = sched_.padded_sigma(t_over, len);
    Mat provisional(len, dim_);
    for (int w = 0; w < len; ++w)
      for (int c = 0; c < dim_; ++c)
        provisional(w, c) = buf_(w, c) + (sig_over[w] - sig_cur[w]) * d(w, c);
    Mat est2 = padded_denoise(den_, sched_, provisional, t_over);
    for (int w = 0; w < len; ++w)
      for (int c = 0; c < dim_; ++c) {
        const double d2 = (provisional(w, c) - est2(w, c)) / sig_over[w];
        buf_(w, c) += 0.5 * (sig_over[w] - sig_cur[w]) * (d(w, c) + d2);
      }
    if (cfg_.s_churn > 0.0) {
      for (int w = 0; w < len; ++w) {
        const double add = std::sqrt(std::max(0.0, sig_next[w] * sig_next[w] -
                                                       sig_over[w] * sig_over[w]));
        for (int c = 0; c < dim_; ++c)
          buf_(w, c) += add * cfg_.s_noise * randn(churn_rng_);
      }
    }
  }
  t_ = t_next;
  slot_sigma_ = sig_next;
  return last_est_;
}

void RollingSampler::shift() {
  const int n_clean = int(std::floor(t_));
  if (n_clean == 0) return;
  if (n_clean > sched_.window)
    throw std::logic_error("shift: cannot emit " + std::to_string(n_clean) +
                           " snapshots from a window of " + std::to_string(sched_.window));
  for (int k = 0; k < n_clean; ++k)
    emitted_.emplace_back(last_est_.row(k), last_est_.row(k) + dim_);
  const int len = buf_.rows;
  Mat next(len, dim_);
  for (int w = 0; w + n_clean < len; ++w)
    for (int c = 0; c < dim_; ++c) next(w, c) = buf_(w + n_clean, c);
  for (int w = len - n_clean; w < len; ++w) {
    Vec eps = prior_.sample_next(dim_);
    for (int c = 0; c < dim_; ++c) next(w, c) = sched_.sigma_max * eps[c];
  }
  buf_ = next;
  t_ -= n_clean;
  slot_sigma_ = sched_.padded_sigma(t_, len);
}

void RollingSampler::step() {
  check_bookkeeping();
  TraceRow row;
  if (trace_) {
    row.iter = iter_;
    row.t_cur = t_;
    row.sigma = slot_sigma_;
  }
  substep();
  const int n_clean = int(std::floor(t_));
  if (trace_) {
    row.t_next = t_;
    row.n_clean = n_clean;
    trace_(row);
  }
  shift();
  check_divergence(iter_);
  ++iter_;
}

void RollingSampler::run(int horizon) {
  if (horizon < 1) throw std::invalid_argument("sampler run: horizon must be >= 1");
  while (emitted_count() < horizon) step();
}

Mat RollingSampler::emitted() const {
  Mat out(int(emitted_.size()), dim_);
  for (std::size_t k = 0; k < emitted_.size(); ++k)
    for (int c = 0; c < dim_; ++c) out(int(k), c) = emitted_[k][c];
  return out;
}

Mat rolling_rollout(const Denoiser& den, const NoiseSchedule& sched, const SamplerConfig& cfg,
                    const Mat& y_init, int horizon, Rng rng, TraceFn trace) {
  RollingSampler s(den, sched, cfg, y_init.cols, rng);
  if (trace) s.set_trace(std::move(trace));
  s.init_from_estimates(y_init);
  s.run(horizon);
  Mat all = s.emitted();
  Mat out(horizon, y_init.cols);  // emission may overshoot when dt > 1
  for (int k = 0; k < horizon; ++k)
    for (int c = 0; c < y_init.cols; ++c) out(k, c) = all(k, c);
  return out;
}

Mat euler_rollout(const Denoiser& den, const NoiseSchedule& sched, SamplerConfig cfg,
                  const Mat& y_init, int horizon, Rng rng) {
  cfg.order = SolverOrder::euler;
  cfg.s_churn = 0.0;
  return rolling_rollout(den, sched, cfg, y_init, horizon, std::move(rng));
}

Mat heun_rollout(const Denoiser& den, const NoiseSchedule& sched, SamplerConfig cfg,
                 const Mat& y_init, int horizon, Rng rng) {
  cfg.order = SolverOrder::heun;
  return rolling_rollout(den, sched, cfg, y_init, horizon, std::move(rng));
}

Vec edm_baseline_sample(const ConditionalDenoiser& den, const Vec& y0, const NoiseSchedule& seg,
                        int n_steps, Rng& rng) {
  seg.validate();
  if (seg.window != 1)
    throw std::invalid_argument("edm_baseline_sample: needs a single-segment schedule");
  if (n_steps < 1) throw std::invalid_argument("edm_baseline_sample: n_steps must be >= 1");
  const int dim = int(y0.size());
  Mat x(1, dim);
  for (int c = 0; c < dim; ++c) x(0, c) = seg.sigma_max * randn(rng);
  for (int i = 0; i < n_steps; ++i) {
    const double s_cur = seg.sigma_bar(1, double(i) / n_steps);
    const double s_next = seg.sigma_bar(1, double(i + 1) / n_steps);
    Mat est = den.denoise_cond(x, {s_cur}, y0);
    Mat provisional(1, dim);
    for (int c = 0; c < dim; ++c) {
      const double d = (x(0, c) - est(0, c)) / s_cur;
      provisional(0, c) = x(0, c) + (s_next - s_cur) * d;
    }
    Mat est2 = den.denoise_cond(provisional, {s_next}, y0);
    for (int c = 0; c < dim; ++c) {
      const double d = (x(0, c) - est(0, c)) / s_cur;
      const double d2 = (provisional(0, c) - est2(0, c)) / s_next;
      x(0, c) += 0.5 * (s_next - s_cur) * (d + d2);
    }
  }
  return Vec(x.row(0), x.row(0) + dim);
}

Mat edm_baseline_rollout(const ConditionalDenoiser& den, const Vec& y0, const NoiseSchedule& seg,
                         int n_steps, int horizon, Rng& rng) {
  if (horizon < 1) throw std::invalid_argument("edm_baseline_rollout: horizon must be >= 1");
  Mat out(horizon, int(y0.size()));
  Vec cur = y0;
  for (int k = 0; k < horizon; ++k) {
    cur = edm_baseline_sample(den, cur, seg, n_steps, rng);
    for (int c = 0; c < int(cur.size()); ++c) out(k, c) = cur[c];
  }
  return out;
}

}  // namespace rollcast
