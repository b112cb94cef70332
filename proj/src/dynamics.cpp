#include "rollcast/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace rollcast {

void SystemSpec::validate() const {
  if (kind == SystemKind::lorenz63 && dim != 3)
    throw std::invalid_argument("system.dim must be 3 for lorenz63");
  if (dim < 1) throw std::invalid_argument("system.dim must be >= 1");
  if (kind == SystemKind::lorenz96 && dim < 4)
    throw std::invalid_argument("system.dim must be >= 4 for lorenz96");
  if (!(dt > 0)) throw std::invalid_argument("system.dt must be > 0");
  if (stride < 1) throw std::invalid_argument("system.stride must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("system.burn_in must be >= 0");
  if (!(theta > 0)) throw std::invalid_argument("system.theta must be > 0");
  if (ou_noise < 0) throw std::invalid_argument("system.ou_noise must be >= 0");
}

namespace {

void lorenz63_rhs(const Vec& x, Vec& dx) {
  const double sigma = 10.0, r = 28.0, b = 8.0 / 3.0;
  dx[0] = sigma * (x[1] - x[0]);
  dx[1] = x[0] * (r - x[2]) - x[1];
  dx[2] = x[0] * x[1] - b * x[2];
}

void lorenz96_rhs(const Vec& x, Vec& dx, double forcing) {
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    const double xm2 = x[(i - 2 + n) % n], xm1 = x[(i - 1 + n) % n], xp1 = x[(i + 1) % n];
    dx[i] = (xp1 - xm2) * xm1 - x[i] + forcing;
  }
}

struct Rk4 {
  const SystemSpec& spec;
  Vec k1, k2, k3, k4, tmp;

  explicit Rk4(const SystemSpec& s)
      : spec(s), k1(s.dim), k2(s.dim), k3(s.dim), k4(s.dim), tmp(s.dim) {}

  void rhs(const Vec& x, Vec& dx) const {
    if (spec.kind == SystemKind::lorenz63)
      lorenz63_rhs(x, dx);
    else
      lorenz96_rhs(x, dx, spec.forcing);
  }

  void step(Vec& x) {
    const double h = spec.dt;
    rhs(x, k1);
    for (int i = 0; i < spec.dim; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (int i = 0; i < spec.dim; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (int i = 0; i < spec.dim; ++i) tmp[i] = x[i] + h * k3[i];
    rhs(tmp, k4);
    for (int i = 0; i < spec.dim; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
};

struct OuStepper {
  double decay, kick;  // y <- decay * y + kick * N(0,1) per channel

  OuStepper(const SystemSpec& s) {
    decay = std::exp(-s.theta * s.dt);
    const double var = s.ou_noise * s.ou_noise / (2.0 * s.theta);
    kick = std::sqrt(var * (1.0 - decay * decay));
  }

  void step(Vec& x, Rng& rng) const {
    for (double& xi : x) xi = decay * xi + kick * randn(rng);
  }
};

}  // namespace

Mat simulate(const SystemSpec& spec, int n_obs, Rng& rng) {
  spec.validate();
  if (n_obs < 1) throw std::invalid_argument("simulate: n_obs must be >= 1");
  Mat out(n_obs, spec.dim);
  Vec x(spec.dim);

  if (spec.kind == SystemKind::ou) {
    const double sd = spec.ou_noise / std::sqrt(2.0 * spec.theta);
    for (double& xi : x) xi = sd * randn(rng);
    OuStepper st(spec);
    for (int s = 0; s < spec.burn_in; ++s) st.step(x, rng);
    for (int o = 0; o < n_obs; ++o) {
      for (int i = 0; i < spec.dim; ++i) out(o, i) = x[i];
      for (int s = 0; s < spec.stride; ++s) st.step(x, rng);
    }
    return out;
  }

  if (spec.kind == SystemKind::lorenz63) {
    for (int i = 0; i < 3; ++i) x[i] = 1.0 + 0.1 * randn(rng);
  } else {
    for (int i = 0; i < spec.dim; ++i) x[i] = spec.forcing;
    x[0] += 0.01 * (1.0 + randn(rng));
  }
  Rk4 st(spec);
  // The comparison is written so NaN also trips it.
  auto guard = [&x] {
    for (double xi : x)
      if (!(std::abs(xi) <= 1e6))
        throw std::runtime_error("simulate: trajectory diverged (|state| > 1e6)");
  };
  for (int s = 0; s < spec.burn_in; ++s) st.step(x);
  for (int o = 0; o < n_obs; ++o) {
    guard();
    for (int i = 0; i < spec.dim; ++i) out(o, i) = x[i];
    for (int s = 0; s < spec.stride; ++s) st.step(x);
  }
  return out;
}

GaussLaw ou_predictive(const SystemSpec& spec, const Vec& y0, int k) {
  spec.validate();
  if (spec.kind != SystemKind::ou)
    throw std::invalid_argument("ou_predictive: system.kind must be ou");
  if (static_cast<int>(y0.size()) != spec.dim)
    throw std::invalid_argument("ou_predictive: y0 size mismatch");
  if (k < 0) throw std::invalid_argument("ou_predictive: k must be >= 0");
  const double decay = std::exp(-spec.theta * spec.obs_dt() * k);
  const double var = spec.ou_noise * spec.ou_noise / (2.0 * spec.theta);
  GaussLaw law;
  law.mean.resize(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i) law.mean[i] = decay * y0[i];
  law.var = var * (1.0 - decay * decay);
  return law;
}

void Standardizer::fit(const Mat& data) {
  if (data.rows < 2) throw std::invalid_argument("standardizer: need >= 2 rows");
  mean.assign(data.cols, 0.0);
  std.assign(data.cols, 0.0);
  for (int r = 0; r < data.rows; ++r)
    for (int c = 0; c < data.cols; ++c) mean[c] += data(r, c);
  for (double& m : mean) m /= data.rows;
  for (int r = 0; r < data.rows; ++r)
    for (int c = 0; c < data.cols; ++c) {
      const double d = data(r, c) - mean[c];
      std[c] += d * d;
    }
  for (double& s : std) {
    s = std::sqrt(s / (data.rows - 1));
    if (s < 1e-12) s = 1.0;
  }
}

Mat Standardizer::apply(const Mat& data) const {
  if (data.cols != static_cast<int>(mean.size()))
    throw std::invalid_argument("standardizer: channel count mismatch");
  Mat out(data.rows, data.cols);
  for (int r = 0; r < data.rows; ++r)
    for (int c = 0; c < data.cols; ++c) out(r, c) = (data(r, c) - mean[c]) / std[c];
  return out;
}

Mat Standardizer::invert(const Mat& data) const {
  if (data.cols != static_cast<int>(mean.size()))
    throw std::invalid_argument("standardizer: channel count mismatch");
  Mat out(data.rows, data.cols);
  for (int r = 0; r < data.rows; ++r)
    for (int c = 0; c < data.cols; ++c) out(r, c) = data(r, c) * std[c] + mean[c];
  return out;
}

int window_count(int n_obs, int window) {
  if (window < 1) throw std::invalid_argument("window_count: window must be >= 1");
  return n_obs > window ? n_obs - window : 0;
}

WindowSample make_window(const Mat& traj, int window, int start) {
  if (start < 1 || start + window > traj.rows)
    throw std::invalid_argument("make_window: start out of range");
  WindowSample s;
  s.y0.assign(traj.row(start - 1), traj.row(start - 1) + traj.cols);
  s.target = Mat(window, traj.cols);
  for (int r = 0; r < window; ++r)
    for (int c = 0; c < traj.cols; ++c) s.target(r, c) = traj(start + r, c);
  return s;
}

WindowSample random_window(const Mat& traj, int window, Rng& rng) {
  const int n = window_count(traj.rows, window);
  if (n < 1) throw std::invalid_argument("random_window: trajectory too short");
  const int start = 1 + static_cast<int>(randu(rng) * n);
  return make_window(traj, window, start >= 1 + n ? n : start);
}

}  // namespace rollcast
