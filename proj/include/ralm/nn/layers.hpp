#pragma once

#include "ralm/nn/tensor.hpp"
#include "ralm/rng.hpp"

namespace ralm::nn {

enum class Mode { Train, Eval };

// Strided 2D cross-correlation (no kernel flip), zero padding, no bias —
// every convolution here feeds a batch norm. Weight layout is
// [out_ch, in_ch, k, k]. Output H' = floor((H + 2p - k) / s) + 1.
struct Conv2d {
  int in_channels = 0;
  int out_channels = 0;
  int ksize = 3;
  int stride = 1;
  int pad = 1;
  Tensor weight;
  Tensor grad_weight;

  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int k, int s, int p);

  Tensor forward(const Tensor& x);
  // Accumulates grad_weight, returns grad wrt input.
  Tensor backward(const Tensor& grad_out);

 private:
  Tensor input_;  // cached for backward
};

// Per-channel batch normalization over (B, H, W), epsilon 1e-5. Train mode
// uses batch statistics (biased variance) and updates the running stats
// with momentum 0.9; eval mode normalizes with the running stats.
struct BatchNorm2d {
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.9;

  int channels = 0;
  Tensor scale, shift;
  Tensor grad_scale, grad_shift;
  Tensor running_mean, running_var;

  BatchNorm2d() = default;
  explicit BatchNorm2d(int ch);

  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& grad_out);

 private:
  Tensor xhat_;
  std::vector<double> invstd_;
  Mode last_mode_ = Mode::Eval;
};

struct ReLU {
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out) const;

 private:
  Tensor input_;
};

// Inverted dropout: train mode zeroes each element with probability `rate`
// and scales survivors by 1/(1-rate); eval mode is the identity. The mask
// comes from the caller-provided stream, so replaying the same stream
// replays the mask.
struct Dropout {
  double rate = 0.0;

  Tensor forward(const Tensor& x, Mode mode, RngStream rng);
  Tensor backward(const Tensor& grad_out) const;

 private:
  Tensor scaled_mask_;  // empty when the pass was an identity
};

// Mean over (H, W): (B, C, H, W) -> (B, C).
struct GlobalAvgPool {
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out) const;

 private:
  std::vector<int> in_shape_;
};

// Fully connected y = x W^T + b with W laid out [out_features, in_features].
struct Dense {
  int in_features = 0;
  int out_features = 0;
  Tensor weight, bias;
  Tensor grad_weight, grad_bias;

  Dense() = default;
  Dense(int in_f, int out_f);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

 private:
  Tensor input_;
};

}  // namespace ralm::nn
