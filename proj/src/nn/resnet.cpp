#include "ralm/nn/resnet.hpp"

#include <cmath>
#include <stdexcept>

namespace ralm::nn {

void ResNetConfig::validate() const {
  if (input_channels < 1 || input_height < 1 || input_width < 1) {
    throw std::invalid_argument("resnet config: input dims must be positive");
  }
  if (stem_filters < 1) throw std::invalid_argument("resnet config: stem_filters must be >= 1");
  if (block_strides.size() != block_channels.size()) {
    throw std::invalid_argument("resnet config: strides and channels must align per block");
  }
  for (int s : block_strides) {
    if (s != 1 && s != 2) throw std::invalid_argument("resnet config: strides must be 1 or 2");
  }
  for (int c : block_channels) {
    if (c < 1) throw std::invalid_argument("resnet config: block channels must be >= 1");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("resnet config: dropout_rate must be in [0,1)");
  }
}

ResidualBlock::ResidualBlock(int in_ch, int out_ch, int stride, double dropout_rate)
    : conv1(in_ch, out_ch, 3, stride, 1),
      conv2(out_ch, out_ch, 3, 1, 1),
      bn1(out_ch),
      bn2(out_ch),
      has_projection(stride != 1 || in_ch != out_ch),
      dropout{dropout_rate} {
  if (has_projection) {
    proj = Conv2d(in_ch, out_ch, 1, stride, 0);
    proj_bn = BatchNorm2d(out_ch);
  }
}

Tensor ResidualBlock::forward(const Tensor& x, Mode mode, RngStream dropout_rng) {
  Tensor main = conv1.forward(x);
  main = bn1.forward(main, mode);
  main = relu_mid_.forward(main);
  main = dropout.forward(main, mode, dropout_rng);
  main = conv2.forward(main);
  main = bn2.forward(main, mode);

  Tensor shortcut = has_projection ? proj_bn.forward(proj.forward(x), mode) : x;
  check_same_shape(main, shortcut, "residual add");
  for (size_t i = 0; i < main.numel(); ++i) main[i] += shortcut[i];
  return relu_out_.forward(main);
}

Tensor ResidualBlock::backward(const Tensor& grad_out) {
  Tensor g = relu_out_.backward(grad_out);

  Tensor g_main = bn2.backward(g);
  g_main = conv2.backward(g_main);
  g_main = dropout.backward(g_main);
  g_main = relu_mid_.backward(g_main);
  g_main = bn1.backward(g_main);
  g_main = conv1.backward(g_main);

  if (has_projection) {
    Tensor g_sc = proj_bn.backward(g);
    g_sc = proj.backward(g_sc);
    for (size_t i = 0; i < g_main.numel(); ++i) g_main[i] += g_sc[i];
    return g_main;
  }
  for (size_t i = 0; i < g_main.numel(); ++i) g_main[i] += g[i];
  return g_main;
}

double he_std(int fan_in) { return std::sqrt(2.0 / fan_in); }

namespace {

void init_normal(Tensor& t, double std, uint64_t seed, uint64_t index) {
  RngStream rng(seed, RngPurpose::kWeightInit, index);
  for (size_t i = 0; i < t.numel(); ++i) t[i] = rng.normal(0.0, std);
}

}  // namespace

ResNet::ResNet(const ResNetConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
  cfg_.validate();
  stem_ = Conv2d(cfg_.input_channels, cfg_.stem_filters, 3, 1, 1);
  stem_bn_ = BatchNorm2d(cfg_.stem_filters);
  int ch = cfg_.stem_filters;
  for (int i = 0; i < cfg_.num_blocks(); ++i) {
    blocks_.emplace_back(ch, cfg_.block_channels[i], cfg_.block_strides[i], cfg_.dropout_rate);
    ch = cfg_.block_channels[i];
  }
  head_ = Dense(ch, 2);

  // He-normal on every conv/dense weight; BN stays (scale 1, shift 0) and
  // the head bias at zero.
  uint64_t idx = 0;
  visit_parameters([&](const std::string& name, Tensor& value, Tensor&) {
    ++idx;
    if (name.find("conv") != std::string::npos || name.find("proj.weight") != std::string::npos) {
      const auto& s = value.shape();
      init_normal(value, he_std(s[1] * s[2] * s[3]), init_seed, idx);
    } else if (name.find("head.weight") != std::string::npos) {
      init_normal(value, he_std(value.shape()[1]), init_seed, idx);
    }
  });
}

Tensor ResNet::forward(const Tensor& batch, Mode mode, uint64_t dropout_seed,
                       uint64_t dropout_step) {
  if (batch.ndim() != 4 || batch.dim(1) != cfg_.input_channels ||
      batch.dim(2) != cfg_.input_height || batch.dim(3) != cfg_.input_width) {
    throw std::invalid_argument("resnet: batch shape " + batch.shape_str() +
                                " does not match configured input");
  }
  Tensor h = stem_relu_.forward(stem_bn_.forward(stem_.forward(batch), mode));
  for (size_t i = 0; i < blocks_.size(); ++i) {
    RngStream rng(dropout_seed, RngPurpose::kDropout, (dropout_step << 16) | i);
    h = blocks_[i].forward(h, mode, rng);
  }
  return head_.forward(gap_.forward(h));
}

void ResNet::backward(const Tensor& grad_pred) {
  Tensor g = gap_.backward(head_.backward(grad_pred));
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    g = it->backward(g);
  }
  stem_.backward(stem_bn_.backward(stem_relu_.backward(g)));
}

void ResNet::zero_grad() {
  visit_parameters([](const std::string&, Tensor&, Tensor& grad) { grad.fill(0.0); });
}

void ResNet::visit_parameters(
    const std::function<void(const std::string&, Tensor&, Tensor&)>& fn) {
  fn("stem.conv.weight", stem_.weight, stem_.grad_weight);
  fn("stem.bn.scale", stem_bn_.scale, stem_bn_.grad_scale);
  fn("stem.bn.shift", stem_bn_.shift, stem_bn_.grad_shift);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "block" + std::to_string(i) + ".";
    ResidualBlock& b = blocks_[i];
    fn(p + "conv1.weight", b.conv1.weight, b.conv1.grad_weight);
    fn(p + "bn1.scale", b.bn1.scale, b.bn1.grad_scale);
    fn(p + "bn1.shift", b.bn1.shift, b.bn1.grad_shift);
    fn(p + "conv2.weight", b.conv2.weight, b.conv2.grad_weight);
    fn(p + "bn2.scale", b.bn2.scale, b.bn2.grad_scale);
    fn(p + "bn2.shift", b.bn2.shift, b.bn2.grad_shift);
    if (b.has_projection) {
      fn(p + "proj.weight", b.proj.weight, b.proj.grad_weight);
      fn(p + "proj_bn.scale", b.proj_bn.scale, b.proj_bn.grad_scale);
      fn(p + "proj_bn.shift", b.proj_bn.shift, b.proj_bn.grad_shift);
    }
  }
  fn("head.weight", head_.weight, head_.grad_weight);
  fn("head.bias", head_.bias, head_.grad_bias);
}

void ResNet::visit_buffers(const std::function<void(const std::string&, Tensor&)>& fn) {
  fn("stem.bn.running_mean", stem_bn_.running_mean);
  fn("stem.bn.running_var", stem_bn_.running_var);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "block" + std::to_string(i) + ".";
    ResidualBlock& b = blocks_[i];
    fn(p + "bn1.running_mean", b.bn1.running_mean);
    fn(p + "bn1.running_var", b.bn1.running_var);
    fn(p + "bn2.running_mean", b.bn2.running_mean);
    fn(p + "bn2.running_var", b.bn2.running_var);
    if (b.has_projection) {
      fn(p + "proj_bn.running_mean", b.proj_bn.running_mean);
      fn(p + "proj_bn.running_var", b.proj_bn.running_var);
    }
  }
}

ResNet::StateDict ResNet::state_dict() {
  StateDict out;
  visit_parameters(
      [&](const std::string& name, Tensor& value, Tensor&) { out.emplace_back(name, value); });
  visit_buffers(
      [&](const std::string& name, Tensor& value) { out.emplace_back(name, value); });
  return out;
}

void ResNet::load_state_dict(const StateDict& state) {
  size_t cursor = 0;
  auto take = [&](const std::string& name, Tensor& value) {
    if (cursor >= state.size() || state[cursor].first != name) {
      throw std::invalid_argument("state dict mismatch at '" + name + "'");
    }
    check_same_shape(state[cursor].second, value, "load_state_dict");
    value = state[cursor].second;
    ++cursor;
  };
  visit_parameters([&](const std::string& name, Tensor& value, Tensor&) { take(name, value); });
  visit_buffers([&](const std::string& name, Tensor& value) { take(name, value); });
  if (cursor != state.size()) {
    throw std::invalid_argument("state dict has extra entries");
  }
}

std::pair<double, Tensor> mse_loss(const Tensor& pred, const Tensor& truth) {
  check_same_shape(pred, truth, "mse_loss");
  if (pred.numel() == 0 || pred.dim(0) == 0) throw std::invalid_argument("mse_loss: empty batch");
  const double n = static_cast<double>(pred.numel());
  double loss = 0.0;
  Tensor grad(pred.shape());
  for (size_t i = 0; i < pred.numel(); ++i) {
    const double d = pred[i] - truth[i];
    loss += d * d;
    grad[i] = 2.0 * d / n;
  }
  return {loss / n, grad};
}

}  // namespace ralm::nn
