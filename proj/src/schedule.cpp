#include "rollcast/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rollcast {

void NoiseSchedule::validate() const {
  if (!(sigma_min > 0.0)) throw std::invalid_argument("schedule.sigma_min must be > 0");
  if (!(sigma_max > sigma_min)) throw std::invalid_argument("schedule.sigma_max must be > sigma_min");
  if (rho == 0.0 || !std::isfinite(rho)) throw std::invalid_argument("schedule.rho must be finite and nonzero");
  if (window < 1) throw std::invalid_argument("schedule.window must be >= 1");
}

double NoiseSchedule::raw_sigma(double u) const {
  // Roots and powers via exp/log so positive and negative rho behave
  // symmetrically.
  const double a = std::exp(std::log(sigma_max) / rho);
  const double b = std::exp(std::log(sigma_min) / rho);
  const double t_wt = 1.0 - u / window;
  const double base = a + t_wt * (b - a);
  if (!(base > 0.0)) throw std::logic_error("schedule evaluated outside its usable range");
  return std::exp(rho * std::log(base));
}

double NoiseSchedule::sigma_bar(int w, double t) const {
  if (w < 1 || w > window)
    throw std::invalid_argument("sigma_bar: w out of [1, window], got " + std::to_string(w));
  if (t < 0.0 || t > 1.0)
    throw std::invalid_argument("sigma_bar: t out of [0, 1], got " + std::to_string(t));
  return raw_sigma(double(w) - t);
}

double NoiseSchedule::sigma_dot(int w, double t) const {
  if (w < 1 || w > window)
    throw std::invalid_argument("sigma_dot: w out of [1, window], got " + std::to_string(w));
  if (t < 0.0 || t > 1.0)
    throw std::invalid_argument("sigma_dot: t out of [0, 1], got " + std::to_string(t));
  const double a = std::exp(std::log(sigma_max) / rho);
  const double b = std::exp(std::log(sigma_min) / rho);
  const double t_wt = 1.0 - (double(w) - t) / window;
  const double base = a + t_wt * (b - a);
  if (!(base > 0.0)) throw std::logic_error("sigma_dot evaluated outside its usable range");
  return rho * std::exp((rho - 1.0) * std::log(base)) * (b - a) / window;
}

std::vector<double> NoiseSchedule::sigma_vec(double t) const {
  std::vector<double> s(window);
  for (int w = 1; w <= window; ++w) s[w - 1] = sigma_bar(w, t);
  return s;
}

std::vector<double> NoiseSchedule::padded_sigma(double t, int n) const {
  if (t < 0.0) throw std::invalid_argument("padded_sigma: t must be >= 0");
  if (n < 1) throw std::invalid_argument("padded_sigma: n must be >= 1");
  std::vector<double> s(n);
  for (int i = 1; i <= n; ++i) {
    const double u = double(i) - t;
    s[i - 1] = (u >= double(window)) ? sigma_max : raw_sigma(u);
  }
  return s;
}

}  // namespace rollcast
