#include "rollcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rollcast {

double crps_fair(Vec members, double obs) {
  const int m = static_cast<int>(members.size());
  if (m < 2) throw std::invalid_argument("crps_fair: need at least 2 members");
  double abs_err = 0.0;
  for (double x : members) abs_err += std::abs(x - obs);
  abs_err /= m;
  std::sort(members.begin(), members.end());
  // Sum over unordered pairs of |x_i - x_j| via the sorted prefix identity.
  double pair_sum = 0.0;
  for (int i = 0; i < m; ++i) pair_sum += members[i] * (2.0 * i - m + 1.0);
  return abs_err - pair_sum / (static_cast<double>(m) * (m - 1));
}

double crps_gaussian(double mean, double sd, double obs) {
  if (sd < 0) throw std::invalid_argument("crps_gaussian: sd must be >= 0");
  if (sd == 0) return std::abs(obs - mean);
  const double z = (obs - mean) / sd;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  return sd * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::sqrt(M_PI));
}

namespace {

void check_field(const Mat& members, const Vec& obs, const Vec& weights) {
  if (members.cols != static_cast<int>(obs.size()))
    throw std::invalid_argument("metrics: obs size does not match members");
  if (!weights.empty() && weights.size() != obs.size())
    throw std::invalid_argument("metrics: weights size does not match members");
}

}  // namespace

double crps_field(const Mat& members, const Vec& obs, const Vec& weights) {
  check_field(members, obs, weights);
  double acc = 0.0, wsum = 0.0;
  Vec col(members.rows);
  for (int c = 0; c < members.cols; ++c) {
    for (int r = 0; r < members.rows; ++r) col[r] = members(r, c);
    const double w = weights.empty() ? 1.0 : weights[c];
    acc += w * crps_fair(col, obs[c]);
    wsum += w;
  }
  return acc / wsum;
}

void SsrAccumulator::add(const Mat& ens, const Vec& obs, const Vec& weights) {
  check_field(ens, obs, weights);
  const int m = ens.rows;
  if (m < 2) throw std::invalid_argument("metrics: need at least 2 members");
  if (members == 0) members = m;
  if (members != m) throw std::invalid_argument("metrics: member count changed");
  for (int c = 0; c < ens.cols; ++c) {
    double mu = 0.0;
    for (int r = 0; r < m; ++r) mu += ens(r, c);
    mu /= m;
    double var = 0.0;
    for (int r = 0; r < m; ++r) {
      const double d = ens(r, c) - mu;
      var += d * d;
    }
    var /= m - 1;
    const double w = weights.empty() ? 1.0 : weights[c];
    const double err = mu - obs[c];
    sum_err2 += w * err * err;
    sum_var += w * var;
    sum_w += w;
  }
}

double SsrAccumulator::rmse() const { return std::sqrt(sum_err2 / sum_w); }
double SsrAccumulator::spread() const { return std::sqrt(sum_var / sum_w); }
double SsrAccumulator::ssr() const {
  return std::sqrt((members + 1.0) / members) * spread() / rmse();
}

EnsembleStats ensemble_stats(const Mat& members, const Vec& obs, const Vec& weights) {
  SsrAccumulator acc;
  acc.add(members, obs, weights);
  return {acc.rmse(), acc.spread(), acc.ssr()};
}

double skill_score(double score, double ref_score) {
  if (ref_score == 0) throw std::invalid_argument("skill_score: reference score is zero");
  return 1.0 - score / ref_score;
}

Vec latitude_weights(int n_bands) {
  if (n_bands < 1) throw std::invalid_argument("latitude_weights: need >= 1 band");
  Vec w(n_bands);
  double total = 0.0;
  for (int i = 0; i < n_bands; ++i) {
    const double lo = -M_PI_2 + M_PI * i / n_bands;
    const double hi = -M_PI_2 + M_PI * (i + 1) / n_bands;
    w[i] = std::sin(hi) - std::sin(lo);
    total += w[i];
  }
  for (double& v : w) v *= n_bands / total;
  return w;
}

Vec power_spectrum(const Vec& x) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::invalid_argument("power_spectrum: need >= 2 samples");
  const int half = n / 2;
  Vec s(half + 1, 0.0);
  for (int k = 0; k <= half; ++k) {
    double re = 0.0, im = 0.0;
    for (int t = 0; t < n; ++t) {
      const double ang = -2.0 * M_PI * k * t / n;
      re += x[t] * std::cos(ang);
      im += x[t] * std::sin(ang);
    }
    const double p = (re * re + im * im) / n;
    const bool self_conjugate = (k == 0) || (2 * k == n);
    s[k] = self_conjugate ? p : 2.0 * p;  // fold the mirrored negative frequency
  }
  return s;
}

}  // namespace rollcast
