#pragma once
#include "rollcast/denoiser.hpp"
#include "rollcast/mat.hpp"
#include "rollcast/rng.hpp"
#include "rollcast/sampler.hpp"
#include "rollcast/schedule.hpp"

namespace rollcast {

// Produces the clean first-window estimates (window x dim) the rolling
// sampler starts from. The sampler itself corrupts them with the schedule's
// t = 0 noise levels, so implementations return plain forecasts.
struct WindowForecaster {
  virtual ~WindowForecaster() = default;
  virtual Mat forecast_window(const Vec& y0, int window, Rng& rng) = 0;
};

// The previous snapshot tiled forward; exact on a constant trajectory.
struct PersistenceInit : WindowForecaster {
  Mat forecast_window(const Vec& y0, int window, Rng& rng) override;
};

// Ground-truth future, for evaluation harnesses only.
struct TruthInit : WindowForecaster {
  const Mat* future = nullptr;  // at least `window` rows
  Mat forecast_window(const Vec& y0, int window, Rng& rng) override;
};

// Autoregressive rollout of the one-step conditional baseline; each call
// draws one fresh member trajectory, so one initializer member seeds one
// rolling-sampler member.
struct BaselineInit : WindowForecaster {
  const ConditionalDenoiser* den = nullptr;
  NoiseSchedule segment;  // single-segment (window == 1) baseline schedule
  int n_steps = 18;
  Mat forecast_window(const Vec& y0, int window, Rng& rng) override;
};

}  // namespace rollcast
