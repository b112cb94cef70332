#pragma once
#include <functional>
#include <vector>

#include "rollcast/mat.hpp"

namespace rollcast {

// EDM-style input/output scalings. sigma_data is the prior std of the data;
// trajectories are standardized per channel downstream, so it is 1 in
// practice.
struct Preconditioner {
  double sigma_data = 1.0;

  double c_in(double sigma) const;
  double c_skip(double sigma) const;
  double c_out(double sigma) const;
  double c_noise(double sigma) const;  // ln(sigma) / 4
};

// Raw network signature: scaled window (rows = snapshots) plus one noise
// embedding per snapshot; returns the raw prediction in the same shape.
using RawNetFn = std::function<Mat(const Mat&, const std::vector<double>&)>;

// Wraps a raw network into a denoiser, one sigma per snapshot:
//   D(x, s)_w = c_skip(s_w) x_w + c_out(s_w) F(c_in(s) x, c_noise(s))_w
Mat apply_denoiser(const Preconditioner& p, const RawNetFn& raw, const Mat& window,
                   const std::vector<double>& sigma);

}  // namespace rollcast
