#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ralm/likelihood.hpp"
#include "ralm/nn/resnet.hpp"

namespace ralm {

enum class OptimizerKind { Adam, Adamax, Adagrad, RMSprop };

const char* to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = 0.001;
  int batch_size = 32;
  double dropout_rate = 0.2;
  int epochs = 50;
  double test_fraction = 0.25;
  uint64_t seed = 0;

  void validate() const;
};

// Loss columns are Eq-style MSE in squared meters; val_rmse is its square
// root in meters. Both are emitted because the two conventions are easy to
// conflate when comparing runs.
struct TrainReport {
  std::vector<double> train_loss;   // per epoch, m^2
  std::vector<double> val_loss;     // per epoch, m^2
  int best_epoch = -1;              // 1-based
  double best_val_loss = 0.0;
  std::string checkpoint_path;      // empty when no writer was attached

  double val_rmse(int epoch_index) const;  // 0-based into val_loss
};

// Per-parameter optimizer state; `v` doubles as the infinity-norm
// accumulator (Adamax) and the squared-gradient sum (Adagrad).
struct ParamState {
  nn::Tensor m;
  nn::Tensor v;
};

inline constexpr double kBeta1 = 0.9;
inline constexpr double kBeta2 = 0.999;
inline constexpr double kRho = 0.9;
inline constexpr double kEpsilon = 1e-8;

// One update with the rule selected by `kind`; t is the 1-based step count.
// Non-finite gradients abort with a NumericError.
void optimizer_step(OptimizerKind kind, ParamState& state, nn::Tensor& param,
                    const nn::Tensor& grad, double lr, int64_t t);

// Applies optimizer_step across a model's parameter list in visit order.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr);

  void step(nn::ResNet& model);
  int64_t steps() const { return t_; }

 private:
  OptimizerKind kind_;
  double lr_;
  int64_t t_ = 0;
  std::vector<ParamState> state_;
};

// Seeded shuffle-then-split into (train indices, test indices); disjoint
// and exhaustive over [0, n). Requires n >= 4.
std::pair<std::vector<size_t>, std::vector<size_t>> split_dataset(size_t n_samples,
                                                                  double test_fraction,
                                                                  uint64_t seed);

// Gathers dataset samples (float storage) into a double network batch plus
// the (B, 2) coordinate targets.
nn::Tensor assemble_batch(const std::vector<SampleTensor>& dataset,
                          const std::vector<size_t>& indices, size_t first, size_t count);
nn::Tensor assemble_targets(const std::vector<SampleTensor>& dataset,
                            const std::vector<size_t>& indices, size_t first, size_t count);

// Eval-mode predictions for the indexed samples, in order.
std::vector<Point2D> predict_positions(nn::ResNet& model,
                                       const std::vector<SampleTensor>& dataset,
                                       const std::vector<size_t>& indices, int batch_size = 64);

using CheckpointWriter =
    std::function<void(const nn::ResNet::StateDict&, const TrainReport&, int epoch)>;

struct TrainResult {
  TrainReport report;
  nn::ResNet::StateDict best_state;
  std::vector<size_t> train_indices;
  std::vector<size_t> val_indices;
};

// Full training protocol: seeded 75/25-style split, per-epoch seeded
// shuffling, minibatch forward/backward/step, eval-mode validation, and a
// snapshot whenever validation loss strictly improves. The returned state
// is the best checkpoint, not the last epoch. `on_best` (when given) is
// invoked on every improvement so callers can persist checkpoints as they
// happen. Trailing minibatches of size 1 are skipped (batch norm needs at
// least 2 rows). Non-finite losses abort with NumericError naming the epoch.
TrainResult train(nn::ResNet& model, const TrainConfig& cfg,
                  const std::vector<SampleTensor>& dataset,
                  const CheckpointWriter& on_best = nullptr, std::ostream* log = nullptr);

}  // namespace ralm
