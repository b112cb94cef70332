#include "rollcast/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace rollcast {

Mlp::Mlp(const MlpShape& shape) : shape_(shape) {
  if (shape.in < 1 || shape.out < 1)
    throw std::invalid_argument("mlp: in and out sizes must be >= 1");
  for (int h : shape.hidden)
    if (h < 1) throw std::invalid_argument("mlp: hidden sizes must be >= 1");
  int prev = shape.in;
  for (int h : shape.hidden) {
    w_.emplace_back(h, prev);
    b_.emplace_back(h, 0.0);
    prev = h;
  }
  w_.emplace_back(shape.out, prev);
  b_.emplace_back(shape.out, 0.0);
}

void Mlp::init_params(Rng& rng) {
  for (auto& w : w_) {
    const double s = 1.0 / std::sqrt(double(w.cols));
    for (auto& x : w.v) x = s * randn(rng);
  }
  for (auto& b : b_)
    for (auto& x : b) x = 0.0;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) n += w_[l].v.size() + b_[l].size();
  return n;
}

static void affine(const Mat& w, const Vec& b, const Vec& x, Vec& y) {
  y.assign(w.rows, 0.0);
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    double acc = b[r];
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

Vec Mlp::forward(const Vec& x) const {
  if (int(x.size()) != shape_.in) throw std::invalid_argument("mlp forward: wrong input size");
  Vec cur = x, nxt;
  for (std::size_t l = 0; l + 1 < w_.size(); ++l) {
    affine(w_[l], b_[l], cur, nxt);
    for (auto& v : nxt) v = silu(v);
    cur.swap(nxt);
  }
  affine(w_.back(), b_.back(), cur, nxt);
  return nxt;
}

Vec Mlp::forward_tape(const Vec& x, Tape& tape) const {
  if (int(x.size()) != shape_.in) throw std::invalid_argument("mlp forward: wrong input size");
  tape.act.assign(w_.size(), {});
  tape.pre.assign(w_.size() - 1, {});
  Vec cur = x;
  for (std::size_t l = 0; l + 1 < w_.size(); ++l) {
    tape.act[l] = cur;
    affine(w_[l], b_[l], cur, tape.pre[l]);
    cur.resize(tape.pre[l].size());
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = silu(tape.pre[l][i]);
  }
  tape.act.back() = cur;
  Vec out;
  affine(w_.back(), b_.back(), cur, out);
  return out;
}

void Mlp::backward(const Tape& tape, const Vec& dLdy, Vec& grad) const {
  if (grad.size() != param_count()) throw std::invalid_argument("mlp backward: grad size mismatch");
  if (dLdy.size() != std::size_t(shape_.out))
    throw std::invalid_argument("mlp backward: dLdy size mismatch");
  // Offsets of each layer inside the flat layout.
  std::vector<std::size_t> off(w_.size());
  std::size_t o = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    off[l] = o;
    o += w_[l].v.size() + b_[l].size();
  }
  Vec delta = dLdy, prev;
  for (int l = int(w_.size()) - 1; l >= 0; --l) {
    const Mat& w = w_[l];
    const Vec& a = tape.act[l];
    double* gw = grad.data() + off[l];
    double* gb = gw + w.v.size();
    for (int r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      double* gwr = gw + std::size_t(r) * w.cols;
      for (int c = 0; c < w.cols; ++c) gwr[c] += d * a[c];
      gb[r] += d;
    }
    if (l == 0) break;
    prev.assign(w.cols, 0.0);
    for (int r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      const double* wr = w.row(r);
      for (int c = 0; c < w.cols; ++c) prev[c] += wr[c] * d;
    }
    for (int c = 0; c < w.cols; ++c) prev[c] *= silu_deriv(tape.pre[l - 1][c]);
    delta.swap(prev);
  }
}

Vec Mlp::flat_params() const {
  Vec p;
  p.reserve(param_count());
  for (std::size_t l = 0; l < w_.size(); ++l) {
    p.insert(p.end(), w_[l].v.begin(), w_[l].v.end());
    p.insert(p.end(), b_[l].begin(), b_[l].end());
  }
  return p;
}

void Mlp::set_flat_params(const Vec& p) {
  if (p.size() != param_count()) throw std::invalid_argument("mlp: flat parameter size mismatch");
  std::size_t o = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    std::copy(p.begin() + o, p.begin() + o + w_[l].v.size(), w_[l].v.begin());
    o += w_[l].v.size();
    std::copy(p.begin() + o, p.begin() + o + b_[l].size(), b_[l].begin());
    o += b_[l].size();
  }
}

}  // namespace rollcast
