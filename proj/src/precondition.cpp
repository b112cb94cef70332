#include "rollcast/precondition.hpp"

#include <cmath>
#include <stdexcept>

namespace rollcast {

static void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("preconditioner: sigma must be finite and > 0");
}

double Preconditioner::c_in(double sigma) const {
  check_sigma(sigma);
  return 1.0 / std::sqrt(sigma * sigma + sigma_data * sigma_data);
}

double Preconditioner::c_skip(double sigma) const {
  check_sigma(sigma);
  return sigma_data * sigma_data / (sigma * sigma + sigma_data * sigma_data);
}

double Preconditioner::c_out(double sigma) const {
  check_sigma(sigma);
  return sigma * sigma_data / std::sqrt(sigma * sigma + sigma_data * sigma_data);
}

double Preconditioner::c_noise(double sigma) const {
  check_sigma(sigma);
  return std::log(sigma) / 4.0;
}

Mat apply_denoiser(const Preconditioner& p, const RawNetFn& raw, const Mat& window,
                   const std::vector<double>& sigma) {
  if (int(sigma.size()) != window.rows)
    throw std::invalid_argument("apply_denoiser: one sigma per snapshot required");
  Mat scaled(window.rows, window.cols);
  std::vector<double> emb(sigma.size());
  for (int w = 0; w < window.rows; ++w) {
    const double ci = p.c_in(sigma[w]);
    emb[w] = p.c_noise(sigma[w]);
    for (int c = 0; c < window.cols; ++c) scaled(w, c) = ci * window(w, c);
  }
  Mat f = raw(scaled, emb);
  if (!f.same_shape(window))
    throw std::invalid_argument("apply_denoiser: raw network returned a wrong shape");
  Mat out(window.rows, window.cols);
  for (int w = 0; w < window.rows; ++w) {
    const double cs = p.c_skip(sigma[w]);
    const double co = p.c_out(sigma[w]);
    for (int c = 0; c < window.cols; ++c) out(w, c) = cs * window(w, c) + co * f(w, c);
  }
  return out;
}

}  // namespace rollcast
