#pragma once

#include <functional>
#include <utility>

#include "ralm/nn/layers.hpp"

namespace ralm::nn {

// Compact residual regression network: stem conv -> BN -> ReLU, a stack of
// residual blocks, global average pooling and a linear 2-output head (x, y
// in meters). Depth, widths and strides are configuration, not fixed.
struct ResNetConfig {
  int input_channels = 16;
  int input_height = 62;
  int input_width = 62;
  int stem_filters = 32;
  std::vector<int> block_strides = {1, 2, 2};   // entries in {1, 2}
  std::vector<int> block_channels = {32, 64, 64};
  double dropout_rate = 0.2;

  int num_blocks() const { return static_cast<int>(block_strides.size()); }
  void validate() const;
};

// conv3x3(s) -> BN -> ReLU -> dropout -> conv3x3(1) -> BN, summed with the
// shortcut (identity, or 1x1 conv + BN when the shape changes), then ReLU.
struct ResidualBlock {
  Conv2d conv1, conv2;
  BatchNorm2d bn1, bn2;
  bool has_projection = false;
  Conv2d proj;
  BatchNorm2d proj_bn;
  Dropout dropout;

  ResidualBlock() = default;
  ResidualBlock(int in_ch, int out_ch, int stride, double dropout_rate);

  Tensor forward(const Tensor& x, Mode mode, RngStream dropout_rng);
  Tensor backward(const Tensor& grad_out);

 private:
  ReLU relu_mid_, relu_out_;
};

double he_std(int fan_in);

class ResNet {
 public:
  explicit ResNet(const ResNetConfig& cfg, uint64_t init_seed = 0);

  const ResNetConfig& config() const { return cfg_; }

  // Predictions are (B, 2). Dropout masks derive from
  // RngStream(dropout_seed, kDropout, (dropout_step << 16) | layer), so a
  // repeated (seed, step) replays the exact masks.
  Tensor forward(const Tensor& batch, Mode mode, uint64_t dropout_seed = 0,
                 uint64_t dropout_step = 0);
  void backward(const Tensor& grad_pred);

  void zero_grad();
  void visit_parameters(const std::function<void(const std::string&, Tensor&, Tensor&)>& fn);
  void visit_buffers(const std::function<void(const std::string&, Tensor&)>& fn);

  // Parameters plus running statistics, in visiting order.
  using StateDict = std::vector<std::pair<std::string, Tensor>>;
  StateDict state_dict();
  void load_state_dict(const StateDict& state);

  int64_t train_steps = 0;

 private:
  ResNetConfig cfg_;
  Conv2d stem_;
  BatchNorm2d stem_bn_;
  ReLU stem_relu_;
  std::vector<ResidualBlock> blocks_;
  GlobalAvgPool gap_;
  Dense head_;
};

// Mean squared error over all 2B coordinate components (the denominator
// counts components, not samples — reported losses are half the per-sample
// squared distance). Returns the loss and d loss / d pred.
std::pair<double, Tensor> mse_loss(const Tensor& pred, const Tensor& truth);

}  // namespace ralm::nn
