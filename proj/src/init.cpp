#include "rollcast/init.hpp"

#include <stdexcept>

namespace rollcast {

Mat PersistenceInit::forecast_window(const Vec& y0, int window, Rng&) {
  if (window < 1) throw std::invalid_argument("init: window must be >= 1");
  Mat out(window, int(y0.size()));
  for (int r = 0; r < window; ++r)
    for (int c = 0; c < out.cols; ++c) out(r, c) = y0[c];
  return out;
}

Mat TruthInit::forecast_window(const Vec& y0, int window, Rng&) {
  if (future == nullptr)
    throw std::invalid_argument("init: truth initialization without ground-truth futures");
  if (future->rows < window || future->cols != int(y0.size()))
    throw std::invalid_argument("init: ground-truth future too short for the window");
  Mat out(window, future->cols);
  for (int r = 0; r < window; ++r)
    for (int c = 0; c < out.cols; ++c) out(r, c) = (*future)(r, c);
  return out;
}

Mat BaselineInit::forecast_window(const Vec& y0, int window, Rng& rng) {
  if (den == nullptr) throw std::invalid_argument("init: missing baseline denoiser");
  return edm_baseline_rollout(*den, y0, segment, n_steps, window, rng);
}

}  // namespace rollcast
