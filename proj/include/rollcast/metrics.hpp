#pragma once
#include "rollcast/mat.hpp"

namespace rollcast {

// Fair (ensemble-size unbiased) continuous ranked probability score of an
// M-member ensemble against a scalar observation. O(M log M). Needs M >= 2.
double crps_fair(Vec members, double obs);

// Closed-form CRPS of a Gaussian predictive law; sd = 0 degenerates to |obs - mean|.
double crps_gaussian(double mean, double sd, double obs);

// Weighted mean over channels of the per-channel fair score.
// members is M x D, obs has D entries; empty weights means all ones.
double crps_field(const Mat& members, const Vec& obs, const Vec& weights = {});

// Ensemble-mean error and ensemble dispersion over one field, plus their
// ratio with the sqrt((M+1)/M) finite-ensemble correction applied.
struct EnsembleStats {
  double rmse = 0.0;
  double spread = 0.0;
  double ssr = 0.0;
};
EnsembleStats ensemble_stats(const Mat& members, const Vec& obs, const Vec& weights = {});

// Accumulates squared error and ensemble variance across many fields (e.g.
// lead times) so the spread/error ratio is taken on the aggregate.
struct SsrAccumulator {
  double sum_err2 = 0.0, sum_var = 0.0, sum_w = 0.0;
  int members = 0;
  void add(const Mat& ens, const Vec& obs, const Vec& weights = {});
  double rmse() const;
  double spread() const;
  double ssr() const;
};

// 1 - score / ref_score; positive when `score` beats the reference.
double skill_score(double score, double ref_score);

// Weights of n equal-width latitude bands spanning pole to pole, proportional
// to band area and normalized to mean 1. n = 1 or a uniform-area grid gives
// all ones.
Vec latitude_weights(int n_bands);

// One-sided power spectrum by direct DFT; bin k covers frequency k/N cycles
// per sample. The bins sum exactly to the series' sum of squares.
Vec power_spectrum(const Vec& x);

}  // namespace rollcast
