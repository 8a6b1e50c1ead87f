#include "ralm/nn/layers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace ralm::nn {

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

int conv_out_dim(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }

// Unpacks one batch image into a [Cin*k*k, Hout*Wout] column matrix.
void im2col(const Tensor& x, int b, int k, int s, int p, int ho, int wo, double* col) {
  const int ci = x.dim(1), h = x.dim(2), w = x.dim(3);
  const size_t ncols = static_cast<size_t>(ho) * wo;
  size_t row = 0;
  for (int c = 0; c < ci; ++c) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj, ++row) {
        double* dst = col + row * ncols;
        for (int oh = 0; oh < ho; ++oh) {
          const int ih = oh * s + ki - p;
          if (ih < 0 || ih >= h) {
            for (int ow = 0; ow < wo; ++ow) dst[oh * wo + ow] = 0.0;
            continue;
          }
          for (int ow = 0; ow < wo; ++ow) {
            const int iw = ow * s + kj - p;
            dst[oh * wo + ow] = (iw < 0 || iw >= w) ? 0.0 : x.at4(b, c, ih, iw);
          }
        }
      }
    }
  }
}

// Scatter-add transpose of im2col.
void col2im(const double* col, int b, int k, int s, int p, int ho, int wo, Tensor& gx) {
  const int ci = gx.dim(1), h = gx.dim(2), w = gx.dim(3);
  const size_t ncols = static_cast<size_t>(ho) * wo;
  size_t row = 0;
  for (int c = 0; c < ci; ++c) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj, ++row) {
        const double* src = col + row * ncols;
        for (int oh = 0; oh < ho; ++oh) {
          const int ih = oh * s + ki - p;
          if (ih < 0 || ih >= h) continue;
          for (int ow = 0; ow < wo; ++ow) {
            const int iw = ow * s + kj - p;
            if (iw < 0 || iw >= w) continue;
            gx.at4(b, c, ih, iw) += src[oh * wo + ow];
          }
        }
      }
    }
  }
}

}  // namespace

Conv2d::Conv2d(int in_ch, int out_ch, int k, int s, int p)
    : in_channels(in_ch),
      out_channels(out_ch),
      ksize(k),
      stride(s),
      pad(p),
      weight({out_ch, in_ch, k, k}),
      grad_weight({out_ch, in_ch, k, k}) {
  if (s != 1 && s != 2) throw std::invalid_argument("conv stride must be 1 or 2");
}

Tensor Conv2d::forward(const Tensor& x) {
  if (x.ndim() != 4 || x.dim(1) != in_channels) {
    throw std::invalid_argument("conv2d: expected (B," + std::to_string(in_channels) +
                                ",H,W) input, got " + x.shape_str());
  }
  const int b = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int ho = conv_out_dim(h, ksize, stride, pad);
  const int wo = conv_out_dim(w, ksize, stride, pad);
  if (ho <= 0 || wo <= 0) throw std::invalid_argument("conv2d: input smaller than kernel");
  input_ = x;

  const int krows = in_channels * ksize * ksize;
  const size_t ncols = static_cast<size_t>(ho) * wo;
  Tensor y({b, out_channels, ho, wo});
  std::vector<double> col(static_cast<size_t>(krows) * ncols);
  ConstMapRM wmat(weight.data(), out_channels, krows);
  for (int i = 0; i < b; ++i) {
    im2col(x, i, ksize, stride, pad, ho, wo, col.data());
    ConstMapRM cmat(col.data(), krows, static_cast<Eigen::Index>(ncols));
    MapRM ymat(y.data() + static_cast<size_t>(i) * out_channels * ncols, out_channels,
               static_cast<Eigen::Index>(ncols));
    ymat.noalias() = wmat * cmat;
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const Tensor& x = input_;
  if (x.numel() == 0) throw std::logic_error("conv2d: backward before forward");
  const int b = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int ho = grad_out.dim(2), wo = grad_out.dim(3);
  const int krows = in_channels * ksize * ksize;
  const size_t ncols = static_cast<size_t>(ho) * wo;

  Tensor gx({b, in_channels, h, w});
  std::vector<double> col(static_cast<size_t>(krows) * ncols);
  std::vector<double> gcol(static_cast<size_t>(krows) * ncols);
  ConstMapRM wmat(weight.data(), out_channels, krows);
  MapRM gwmat(grad_weight.data(), out_channels, krows);
  for (int i = 0; i < b; ++i) {
    // Columns are recomputed rather than cached; caching them across a deep
    // net costs far more memory than the extra unpack.
    im2col(x, i, ksize, stride, pad, ho, wo, col.data());
    ConstMapRM cmat(col.data(), krows, static_cast<Eigen::Index>(ncols));
    ConstMapRM gymat(grad_out.data() + static_cast<size_t>(i) * out_channels * ncols,
                     out_channels, static_cast<Eigen::Index>(ncols));
    gwmat.noalias() += gymat * cmat.transpose();
    MapRM gcmat(gcol.data(), krows, static_cast<Eigen::Index>(ncols));
    gcmat.noalias() = wmat.transpose() * gymat;
    col2im(gcol.data(), i, ksize, stride, pad, ho, wo, gx);
  }
  return gx;
}

BatchNorm2d::BatchNorm2d(int ch)
    : channels(ch),
      scale({ch}),
      shift({ch}),
      grad_scale({ch}),
      grad_shift({ch}),
      running_mean({ch}),
      running_var({ch}) {
  scale.fill(1.0);
  running_var.fill(1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, Mode mode) {
  if (x.ndim() != 4 || x.dim(1) != channels) {
    throw std::invalid_argument("batch_norm: expected (B," + std::to_string(channels) +
                                ",H,W) input, got " + x.shape_str());
  }
  const int b = x.dim(0), h = x.dim(2), w = x.dim(3);
  if (mode == Mode::Train && b < 2) {
    throw std::invalid_argument("batch_norm: train mode requires batch size >= 2");
  }
  const double count = static_cast<double>(b) * h * w;

  xhat_ = Tensor({b, channels, h, w});
  invstd_.assign(channels, 0.0);
  last_mode_ = mode;
  Tensor y({b, channels, h, w});

  for (int c = 0; c < channels; ++c) {
    double mean, var;
    if (mode == Mode::Train) {
      double s = 0.0;
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < h; ++j)
          for (int l = 0; l < w; ++l) s += x.at4(i, c, j, l);
      mean = s / count;
      double sv = 0.0;
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < h; ++j)
          for (int l = 0; l < w; ++l) {
            const double d = x.at4(i, c, j, l) - mean;
            sv += d * d;
          }
      var = sv / count;
      running_mean[c] = kMomentum * running_mean[c] + (1.0 - kMomentum) * mean;
      running_var[c] = kMomentum * running_var[c] + (1.0 - kMomentum) * var;
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const double inv = 1.0 / std::sqrt(var + kEps);
    invstd_[c] = inv;
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < h; ++j)
        for (int l = 0; l < w; ++l) {
          const double xh = (x.at4(i, c, j, l) - mean) * inv;
          xhat_.at4(i, c, j, l) = xh;
          y.at4(i, c, j, l) = scale[c] * xh + shift[c];
        }
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
  check_same_shape(grad_out, xhat_, "batch_norm backward");
  const int b = grad_out.dim(0), h = grad_out.dim(2), w = grad_out.dim(3);
  const double count = static_cast<double>(b) * h * w;
  Tensor gx({b, channels, h, w});

  for (int c = 0; c < channels; ++c) {
    double sum_gy = 0.0, sum_gy_xhat = 0.0;
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < h; ++j)
        for (int l = 0; l < w; ++l) {
          const double gy = grad_out.at4(i, c, j, l);
          sum_gy += gy;
          sum_gy_xhat += gy * xhat_.at4(i, c, j, l);
        }
    grad_shift[c] += sum_gy;
    grad_scale[c] += sum_gy_xhat;

    if (last_mode_ == Mode::Train) {
      const double k = scale[c] * invstd_[c] / count;
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < h; ++j)
          for (int l = 0; l < w; ++l) {
            gx.at4(i, c, j, l) = k * (count * grad_out.at4(i, c, j, l) - sum_gy -
                                      xhat_.at4(i, c, j, l) * sum_gy_xhat);
          }
    } else {
      // Running stats are constants in eval mode.
      const double k = scale[c] * invstd_[c];
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < h; ++j)
          for (int l = 0; l < w; ++l) gx.at4(i, c, j, l) = k * grad_out.at4(i, c, j, l);
    }
  }
  return gx;
}

Tensor ReLU::forward(const Tensor& x) {
  input_ = x;
  Tensor y = x;
  for (size_t i = 0; i < y.numel(); ++i) {
    if (y[i] < 0.0) y[i] = 0.0;
  }
  return y;
}

Tensor ReLU::backward(const Tensor& grad_out) const {
  check_same_shape(grad_out, input_, "relu backward");
  Tensor gx = grad_out;
  for (size_t i = 0; i < gx.numel(); ++i) {
    if (input_[i] <= 0.0) gx[i] = 0.0;
  }
  return gx;
}

Tensor Dropout::forward(const Tensor& x, Mode mode, RngStream rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0,1)");
  if (mode == Mode::Eval || rate == 0.0) {
    scaled_mask_ = Tensor();
    return x;
  }
  const double keep = 1.0 - rate;
  scaled_mask_ = Tensor(x.shape());
  Tensor y = x;
  for (size_t i = 0; i < y.numel(); ++i) {
    const double m = rng.next_double() < rate ? 0.0 : 1.0 / keep;
    scaled_mask_[i] = m;
    y[i] *= m;
  }
  return y;
}

Tensor Dropout::backward(const Tensor& grad_out) const {
  if (scaled_mask_.numel() == 0) return grad_out;  // identity pass
  check_same_shape(grad_out, scaled_mask_, "dropout backward");
  Tensor gx = grad_out;
  for (size_t i = 0; i < gx.numel(); ++i) gx[i] *= scaled_mask_[i];
  return gx;
}

Tensor GlobalAvgPool::forward(const Tensor& x) {
  if (x.ndim() != 4) throw std::invalid_argument("global_avg_pool: expected 4D input");
  in_shape_ = x.shape();
  const int b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor y({b, c});
  const double inv = 1.0 / (static_cast<double>(h) * w);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < c; ++j) {
      double s = 0.0;
      for (int l = 0; l < h; ++l)
        for (int t = 0; t < w; ++t) s += x.at4(i, j, l, t);
      y.at2(i, j) = s * inv;
    }
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) const {
  const int b = in_shape_[0], c = in_shape_[1], h = in_shape_[2], w = in_shape_[3];
  Tensor gx({b, c, h, w});
  const double inv = 1.0 / (static_cast<double>(h) * w);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < c; ++j) {
      const double g = grad_out.at2(i, j) * inv;
      for (int l = 0; l < h; ++l)
        for (int t = 0; t < w; ++t) gx.at4(i, j, l, t) = g;
    }
  return gx;
}

Dense::Dense(int in_f, int out_f)
    : in_features(in_f),
      out_features(out_f),
      weight({out_f, in_f}),
      bias({out_f}),
      grad_weight({out_f, in_f}),
      grad_bias({out_f}) {}

Tensor Dense::forward(const Tensor& x) {
  if (x.ndim() != 2 || x.dim(1) != in_features) {
    throw std::invalid_argument("dense: expected (B," + std::to_string(in_features) +
                                ") input, got " + x.shape_str());
  }
  input_ = x;
  const int b = x.dim(0);
  Tensor y({b, out_features});
  ConstMapRM xm(x.data(), b, in_features);
  ConstMapRM wm(weight.data(), out_features, in_features);
  MapRM ym(y.data(), b, out_features);
  ym.noalias() = xm * wm.transpose();
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < out_features; ++j) y.at2(i, j) += bias[j];
  return y;
}

Tensor Dense::backward(const Tensor& grad_out) {
  const int b = input_.dim(0);
  ConstMapRM gym(grad_out.data(), b, out_features);
  ConstMapRM xm(input_.data(), b, in_features);
  ConstMapRM wm(weight.data(), out_features, in_features);
  MapRM gwm(grad_weight.data(), out_features, in_features);
  gwm.noalias() += gym.transpose() * xm;
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < out_features; ++j) grad_bias[j] += grad_out.at2(i, j);
  Tensor gx({b, in_features});
  MapRM gxm(gx.data(), b, in_features);
  gxm.noalias() = gym * wm;
  return gx;
}

}  // namespace ralm::nn
