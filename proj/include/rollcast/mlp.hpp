#pragma once
#include <vector>

#include "rollcast/mat.hpp"
#include "rollcast/rng.hpp"

namespace rollcast {

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }
inline double silu_deriv(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

struct MlpShape {
  int in = 0, out = 0;
  std::vector<int> hidden;
  bool operator==(const MlpShape&) const = default;
};

// Plain fully connected network: SiLU hidden layers, linear output layer.
// Weights are (out x in) row-major, biases start at zero, weights at
// N(0, 1/fan_in). Double precision in memory; checkpoints round to float32.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(const MlpShape& shape);

  void init_params(Rng& rng);

  const MlpShape& shape() const { return shape_; }
  std::size_t param_count() const;

  Vec forward(const Vec& x) const;

  // Training path keeps the activations backward needs.
  struct Tape {
    std::vector<Vec> act;  // act[l] = input of layer l
    std::vector<Vec> pre;  // pre[l] = pre-activation of hidden layer l
  };
  Vec forward_tape(const Vec& x, Tape& tape) const;

  // Accumulates one sample's parameter gradients into grad, which must be
  // sized and laid out like flat_params(). dLdy is dLoss/d(output).
  void backward(const Tape& tape, const Vec& dLdy, Vec& grad) const;

  // Layer by layer: weight rows, then bias.
  Vec flat_params() const;
  void set_flat_params(const Vec& p);

 private:
  MlpShape shape_;
  std::vector<Mat> w_;
  std::vector<Vec> b_;
};

}  // namespace rollcast
