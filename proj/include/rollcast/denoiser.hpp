#pragma once
#include <vector>

#include "rollcast/mat.hpp"
#include "rollcast/mlp.hpp"
#include "rollcast/precondition.hpp"
#include "rollcast/schedule.hpp"

namespace rollcast {

// A denoiser maps a noisy window (rows = snapshots) and a per-snapshot noise
// level vector to an estimate of the clean window.
struct Denoiser {
  virtual ~Denoiser() = default;
  virtual Mat denoise(const Mat& window, const std::vector<double>& sigma) const = 0;
};

// Exact posterior mean for i.i.d. Gaussian data N(mu, sigma_data^2):
//   D(x; s) = mu + sd^2 / (sd^2 + s^2) (x - mu), applied per entry.
// This equals x + s^2 * score(x) by Tweedie, so it is the analytic reference
// the samplers and losses are validated against.
struct GaussianOracle : Denoiser {
  double mu = 0.0;
  double sigma_data = 1.0;
  Mat denoise(const Mat& window, const std::vector<double>& sigma) const override;
};

// Denoiser that additionally sees a conditioning vector (the one-step
// baseline conditions on the previous snapshot).
struct ConditionalDenoiser {
  virtual ~ConditionalDenoiser() = default;
  virtual Mat denoise_cond(const Mat& window, const std::vector<double>& sigma,
                           const Vec& cond) const = 0;
};

// Learned denoiser. Network input is the preconditioned window flattened
// row-major, then one noise embedding per snapshot, then (optionally) a
// conditioning vector appended raw; output is the raw prediction reshaped to
// the window. cond size 0 gives the plain rolling denoiser; the one-step
// baseline conditions on the previous snapshot.
class MlpDenoiser : public Denoiser, public ConditionalDenoiser {
 public:
  MlpDenoiser() = default;
  MlpDenoiser(int window, int dim, int cond_dim, std::vector<int> hidden, double sigma_data);

  void init_params(Rng& rng) { net_.init_params(rng); }

  int window() const { return window_; }
  int dim() const { return dim_; }
  int cond_dim() const { return cond_dim_; }
  const Preconditioner& preconditioner() const { return pre_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  Mat denoise(const Mat& window, const std::vector<double>& sigma) const override;
  Mat denoise_cond(const Mat& window, const std::vector<double>& sigma,
                   const Vec& cond) const override;

  // Training path: same result as denoise/denoise_cond but records what the
  // parameter gradient needs.
  struct Tape {
    Mlp::Tape net;
    std::vector<double> c_out;  // per snapshot
  };
  Mat denoise_tape(const Mat& window, const std::vector<double>& sigma, const Vec* cond,
                   Tape& tape) const;
  // Chains dLoss/dDenoised through the output scaling into the network;
  // accumulates into grad (flat layout of net().flat_params()).
  void backward(const Tape& tape, const Mat& dLdD, Vec& grad) const;

 private:
  Vec pack_input(const Mat& window, const std::vector<double>& sigma, const Vec* cond) const;

  Preconditioner pre_;
  Mlp net_;
  int window_ = 0, dim_ = 0, cond_dim_ = 0;
};

// Adapts a conditional denoiser plus a fixed conditioning vector to the plain
// interface.
struct BoundDenoiser : Denoiser {
  const MlpDenoiser* inner = nullptr;
  Vec cond;
  Mat denoise(const Mat& window, const std::vector<double>& sigma) const override {
    return inner->denoise_cond(window, sigma, cond);
  }
};

// Applies `d` to the active part of a padded sampler buffer at global time
// t >= 0 and copies every other slot through untouched. The active snapshots
// are indices {n_done+1, ..., n_done+W} (1-based) with n_done = max(0,
// ceil(t)-1): exactly the snapshots whose noise level is still inside
// [sigma_min, sigma_max]. At integer t the just-finished snapshot therefore
// still gets denoised (its level is exactly sigma_min), which keeps the
// corrector step of the integrator second order there.
Mat padded_denoise(const Denoiser& d, const NoiseSchedule& s, const Mat& padded, double t);

int padded_active_start(double t);  // n_done as defined above

}  // namespace rollcast
