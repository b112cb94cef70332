#include "rollcast/denoiser.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rollcast {

Mat GaussianOracle::denoise(const Mat& window, const std::vector<double>& sigma) const {
  if (int(sigma.size()) != window.rows)
    throw std::invalid_argument("oracle denoise: one sigma per snapshot required");
  const double d2 = sigma_data * sigma_data;
  Mat out(window.rows, window.cols);
  for (int w = 0; w < window.rows; ++w) {
    const double g = d2 / (d2 + sigma[w] * sigma[w]);
    for (int c = 0; c < window.cols; ++c) out(w, c) = mu + g * (window(w, c) - mu);
  }
  return out;
}

MlpDenoiser::MlpDenoiser(int window, int dim, int cond_dim, std::vector<int> hidden,
                         double sigma_data)
    : window_(window), dim_(dim), cond_dim_(cond_dim) {
  if (window < 1 || dim < 1 || cond_dim < 0)
    throw std::invalid_argument("mlp denoiser: bad window/dim/cond_dim");
  pre_.sigma_data = sigma_data;
  MlpShape s;
  s.in = window * dim + window + cond_dim;
  s.out = window * dim;
  s.hidden = std::move(hidden);
  net_ = Mlp(s);
}

Vec MlpDenoiser::pack_input(const Mat& window, const std::vector<double>& sigma,
                            const Vec* cond) const {
  if (window.rows != window_ || window.cols != dim_)
    throw std::invalid_argument("mlp denoiser: window shape mismatch, got " +
                                std::to_string(window.rows) + "x" + std::to_string(window.cols));
  if (int(sigma.size()) != window_)
    throw std::invalid_argument("mlp denoiser: one sigma per snapshot required");
  if (cond_dim_ > 0 && (!cond || int(cond->size()) != cond_dim_))
    throw std::invalid_argument("mlp denoiser: conditioning vector of size " +
                                std::to_string(cond_dim_) + " required");
  Vec x(std::size_t(window_) * dim_ + window_ + cond_dim_);
  for (int w = 0; w < window_; ++w) {
    const double ci = pre_.c_in(sigma[w]);
    for (int c = 0; c < dim_; ++c) x[std::size_t(w) * dim_ + c] = ci * window(w, c);
  }
  for (int w = 0; w < window_; ++w) x[std::size_t(window_) * dim_ + w] = pre_.c_noise(sigma[w]);
  if (cond_dim_ > 0)
    std::copy(cond->begin(), cond->end(), x.begin() + std::size_t(window_) * dim_ + window_);
  return x;
}

Mat MlpDenoiser::denoise(const Mat& window, const std::vector<double>& sigma) const {
  if (cond_dim_ != 0)
    throw std::invalid_argument("mlp denoiser: conditional model called without conditioning");
  return denoise_cond(window, sigma, {});
}

Mat MlpDenoiser::denoise_cond(const Mat& window, const std::vector<double>& sigma,
                              const Vec& cond) const {
  Vec x = pack_input(window, sigma, cond_dim_ > 0 ? &cond : nullptr);
  Vec f = net_.forward(x);
  Mat out(window_, dim_);
  for (int w = 0; w < window_; ++w) {
    const double cs = pre_.c_skip(sigma[w]);
    const double co = pre_.c_out(sigma[w]);
    for (int c = 0; c < dim_; ++c)
      out(w, c) = cs * window(w, c) + co * f[std::size_t(w) * dim_ + c];
  }
  return out;
}

Mat MlpDenoiser::denoise_tape(const Mat& window, const std::vector<double>& sigma, const Vec* cond,
                              Tape& tape) const {
  Vec x = pack_input(window, sigma, cond);
  Vec f = net_.forward_tape(x, tape.net);
  tape.c_out.resize(window_);
  Mat out(window_, dim_);
  for (int w = 0; w < window_; ++w) {
    const double cs = pre_.c_skip(sigma[w]);
    tape.c_out[w] = pre_.c_out(sigma[w]);
    for (int c = 0; c < dim_; ++c)
      out(w, c) = cs * window(w, c) + tape.c_out[w] * f[std::size_t(w) * dim_ + c];
  }
  return out;
}

void MlpDenoiser::backward(const Tape& tape, const Mat& dLdD, Vec& grad) const {
  if (dLdD.rows != window_ || dLdD.cols != dim_)
    throw std::invalid_argument("mlp denoiser backward: gradient shape mismatch");
  Vec dLdf(std::size_t(window_) * dim_);
  for (int w = 0; w < window_; ++w)
    for (int c = 0; c < dim_; ++c) dLdf[std::size_t(w) * dim_ + c] = dLdD(w, c) * tape.c_out[w];
  net_.backward(tape.net, dLdf, grad);
}

int padded_active_start(double t) {
  if (t < 0.0) throw std::invalid_argument("padded_active_start: t must be >= 0");
  return std::max(0, int(std::ceil(t)) - 1);
}

Mat padded_denoise(const Denoiser& d, const NoiseSchedule& s, const Mat& padded, double t) {
  const int n_done = padded_active_start(t);
  const int W = s.window;
  if (padded.rows < n_done + W)
    throw std::invalid_argument("padded_denoise: buffer of " + std::to_string(padded.rows) +
                                " slots cannot hold the active window at t=" + std::to_string(t));
  Mat sub(W, padded.cols);
  std::vector<double> sigma(W);
  for (int j = 0; j < W; ++j) {
    sigma[j] = s.sigma_bar(j + 1, t - n_done);
    for (int c = 0; c < padded.cols; ++c) sub(j, c) = padded(n_done + j, c);
  }
  Mat est = d.denoise(sub, sigma);
  Mat out = padded;  // inactive slots pass through bit-identical
  for (int j = 0; j < W; ++j)
    for (int c = 0; c < padded.cols; ++c) out(n_done + j, c) = est(j, c);
  return out;
}

}  // namespace rollcast
