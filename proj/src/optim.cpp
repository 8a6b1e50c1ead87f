#include "ralm/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ralm/errors.hpp"

namespace ralm {

const char* to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Adam: return "Adam";
    case OptimizerKind::Adamax: return "Adamax";
    case OptimizerKind::Adagrad: return "Adagrad";
    case OptimizerKind::RMSprop: return "RMSprop";
  }
  return "?";
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "Adam" || s == "adam") return OptimizerKind::Adam;
  if (s == "Adamax" || s == "adamax") return OptimizerKind::Adamax;
  if (s == "Adagrad" || s == "adagrad") return OptimizerKind::Adagrad;
  if (s == "RMSprop" || s == "rmsprop") return OptimizerKind::RMSprop;
  throw std::invalid_argument("unknown optimizer '" + s + "'");
}

void TrainConfig::validate() const {
  if (learning_rate <= 0) throw std::invalid_argument("learning_rate must be positive");
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0,1)");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("dropout_rate must be in [0,1)");
  }
}

double TrainReport::val_rmse(int epoch_index) const {
  return std::sqrt(val_loss.at(epoch_index));
}

void optimizer_step(OptimizerKind kind, ParamState& state, nn::Tensor& param,
                    const nn::Tensor& grad, double lr, int64_t t) {
  check_same_shape(param, grad, "optimizer_step");
  if (t < 1) throw std::invalid_argument("optimizer step count must be >= 1");
  if (!grad.all_finite()) throw NumericError("non-finite gradient in optimizer step");
  if (state.m.numel() != param.numel()) {
    state.m = nn::Tensor(param.shape());
    state.v = nn::Tensor(param.shape());
  }

  const size_t n = param.numel();
  switch (kind) {
    case OptimizerKind::Adam: {
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
      for (size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        state.m[i] = kBeta1 * state.m[i] + (1.0 - kBeta1) * g;
        state.v[i] = kBeta2 * state.v[i] + (1.0 - kBeta2) * g * g;
        param[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + kEpsilon);
      }
      break;
    }
    case OptimizerKind::Adamax: {
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
      for (size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        state.m[i] = kBeta1 * state.m[i] + (1.0 - kBeta1) * g;
        state.v[i] = std::max(kBeta2 * state.v[i], std::abs(g));
        param[i] -= (lr / c1) * state.m[i] / (state.v[i] + kEpsilon);
      }
      break;
    }
    case OptimizerKind::Adagrad: {
      for (size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        state.v[i] += g * g;
        param[i] -= lr * g / (std::sqrt(state.v[i]) + kEpsilon);
      }
      break;
    }
    case OptimizerKind::RMSprop: {
      for (size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        state.v[i] = kRho * state.v[i] + (1.0 - kRho) * g * g;
        param[i] -= lr * g / (std::sqrt(state.v[i]) + kEpsilon);
      }
      break;
    }
  }
}

Optimizer::Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {
  if (lr <= 0) throw std::invalid_argument("learning rate must be positive");
}

void Optimizer::step(nn::ResNet& model) {
  ++t_;
  size_t slot = 0;
  model.visit_parameters([&](const std::string& name, nn::Tensor& value, nn::Tensor& grad) {
    if (slot >= state_.size()) state_.emplace_back();
    if (!grad.all_finite()) {
      throw NumericError("non-finite gradient for parameter '" + name + "'");
    }
    optimizer_step(kind_, state_[slot], value, grad, lr_, t_);
    ++slot;
  });
  model.train_steps = t_;
}

std::pair<std::vector<size_t>, std::vector<size_t>> split_dataset(size_t n_samples,
                                                                  double test_fraction,
                                                                  uint64_t seed) {
  if (n_samples < 4) throw std::invalid_argument("need at least 4 samples to split");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0,1)");
  }
  std::vector<size_t> order(n_samples);
  for (size_t i = 0; i < n_samples; ++i) order[i] = i;

  // Fisher-Yates on our own stream; std::shuffle sequences are not
  // portable across standard libraries.
  RngStream rng(seed, RngPurpose::kShuffle, 0);
  for (size_t i = n_samples - 1; i > 0; --i) {
    const size_t j = rng.uniform_index(i + 1);
    std::swap(order[i], order[j]);
  }

  size_t n_test = static_cast<size_t>(std::llround(test_fraction * n_samples));
  n_test = std::clamp<size_t>(n_test, 1, n_samples - 1);
  std::vector<size_t> test(order.begin(), order.begin() + n_test);
  std::vector<size_t> train(order.begin() + n_test, order.end());
  return {train, test};
}

nn::Tensor assemble_batch(const std::vector<SampleTensor>& dataset,
                          const std::vector<size_t>& indices, size_t first, size_t count) {
  const SampleTensor& proto = dataset[indices[first]];
  nn::Tensor batch({static_cast<int>(count), proto.channels, proto.height, proto.width});
  const size_t per = static_cast<size_t>(proto.channels) * proto.height * proto.width;
  for (size_t i = 0; i < count; ++i) {
    const SampleTensor& s = dataset[indices[first + i]];
    if (s.values.size() != per) throw std::invalid_argument("inconsistent sample shapes");
    double* dst = batch.data() + i * per;
    for (size_t j = 0; j < per; ++j) dst[j] = static_cast<double>(s.values[j]);
  }
  return batch;
}

nn::Tensor assemble_targets(const std::vector<SampleTensor>& dataset,
                            const std::vector<size_t>& indices, size_t first, size_t count) {
  nn::Tensor t({static_cast<int>(count), 2});
  for (size_t i = 0; i < count; ++i) {
    const SampleTensor& s = dataset[indices[first + i]];
    t.at2(static_cast<int>(i), 0) = s.target.x;
    t.at2(static_cast<int>(i), 1) = s.target.y;
  }
  return t;
}

std::vector<Point2D> predict_positions(nn::ResNet& model,
                                       const std::vector<SampleTensor>& dataset,
                                       const std::vector<size_t>& indices, int batch_size) {
  std::vector<Point2D> out;
  out.reserve(indices.size());
  for (size_t start = 0; start < indices.size(); start += batch_size) {
    const size_t count = std::min<size_t>(batch_size, indices.size() - start);
    nn::Tensor batch = assemble_batch(dataset, indices, start, count);
    nn::Tensor pred = model.forward(batch, nn::Mode::Eval);
    for (size_t i = 0; i < count; ++i) {
      out.push_back({pred.at2(static_cast<int>(i), 0), pred.at2(static_cast<int>(i), 1)});
    }
  }
  return out;
}

namespace {

double eval_loss(nn::ResNet& model, const std::vector<SampleTensor>& dataset,
                 const std::vector<size_t>& indices, int batch_size) {
  double sq_sum = 0.0;
  size_t components = 0;
  for (size_t start = 0; start < indices.size(); start += batch_size) {
    const size_t count = std::min<size_t>(batch_size, indices.size() - start);
    nn::Tensor batch = assemble_batch(dataset, indices, start, count);
    nn::Tensor truth = assemble_targets(dataset, indices, start, count);
    nn::Tensor pred = model.forward(batch, nn::Mode::Eval);
    const auto [loss, grad] = nn::mse_loss(pred, truth);
    sq_sum += loss * static_cast<double>(2 * count);
    components += 2 * count;
  }
  return sq_sum / static_cast<double>(components);
}

}  // namespace

TrainResult train(nn::ResNet& model, const TrainConfig& cfg,
                  const std::vector<SampleTensor>& dataset, const CheckpointWriter& on_best,
                  std::ostream* log) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  const auto& mc = model.config();
  const SampleTensor& first = dataset.front();
  if (first.channels != mc.input_channels || first.height != mc.input_height ||
      first.width != mc.input_width) {
    throw std::invalid_argument("dataset sample shape does not match model input config");
  }

  auto [train_idx, val_idx] = split_dataset(dataset.size(), cfg.test_fraction, cfg.seed);

  Optimizer opt(cfg.optimizer, cfg.learning_rate);
  TrainResult result;
  TrainReport& report = result.report;
  result.train_indices = train_idx;
  result.val_indices = val_idx;
  double best = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fresh seeded order every epoch.
    RngStream shuffle_rng(cfg.seed, RngPurpose::kShuffle, static_cast<uint64_t>(epoch));
    std::vector<size_t> order = train_idx;
    for (size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle_rng.uniform_index(i + 1)]);
    }

    double sq_sum = 0.0;
    size_t components = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t count = std::min<size_t>(cfg.batch_size, order.size() - start);
      if (count < 2) break;  // batch norm cannot normalize a single row
      nn::Tensor batch = assemble_batch(dataset, order, start, count);
      nn::Tensor truth = assemble_targets(dataset, order, start, count);

      model.zero_grad();
      nn::Tensor pred = model.forward(batch, nn::Mode::Train, cfg.seed,
                                      static_cast<uint64_t>(opt.steps() + 1));
      const auto [loss, grad] = nn::mse_loss(pred, truth);
      if (!std::isfinite(loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch));
      }
      model.backward(grad);
      opt.step(model);

      sq_sum += loss * static_cast<double>(2 * count);
      components += 2 * count;
    }
    if (components == 0) throw std::invalid_argument("train split too small for batch size");

    const double train_loss = sq_sum / static_cast<double>(components);
    const double val_loss = eval_loss(model, dataset, val_idx, cfg.batch_size);
    if (!std::isfinite(val_loss)) {
      throw NumericError("validation diverged at epoch " + std::to_string(epoch));
    }
    report.train_loss.push_back(train_loss);
    report.val_loss.push_back(val_loss);

    if (val_loss < best) {
      best = val_loss;
      report.best_epoch = epoch;
      report.best_val_loss = val_loss;
      result.best_state = model.state_dict();
      if (on_best) on_best(result.best_state, report, epoch);
    }
    if (log) {
      (*log) << "epoch " << epoch << "/" << cfg.epochs << "  train_loss " << train_loss
             << "  val_loss " << val_loss << "  val_rmse " << std::sqrt(val_loss)
             << (report.best_epoch == epoch ? "  *" : "") << "\n";
    }
  }
  return result;
}

}  // namespace ralm
