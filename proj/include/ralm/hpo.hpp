#pragma once

#include <functional>

#include "ralm/optim.hpp"

namespace ralm {

// Discrete hyperparameter grid. The default lists span 4*4*4*4 = 256
// configurations.
struct SearchSpace {
  std::vector<OptimizerKind> optimizers = {OptimizerKind::Adam, OptimizerKind::Adamax,
                                           OptimizerKind::Adagrad, OptimizerKind::RMSprop};
  std::vector<double> learning_rates = {0.01, 0.001, 0.0005, 0.0001};
  std::vector<int> batch_sizes = {8, 16, 32, 64};
  std::vector<double> dropout_rates = {0.2, 0.3, 0.4, 0.5};

  size_t cardinality() const;
  void validate() const;
};

struct TrialRecord {
  int trial = 0;              // 1-based
  TrainConfig config;
  double val_loss = 0.0;      // m^2; +inf when the trial diverged
  double val_rmse = 0.0;      // m
};

struct SearchResult {
  std::vector<TrialRecord> trials;
  int best_trial = -1;        // 1-based; minimal val_loss, earliest on ties
};

// Runs one sampled configuration to completion and returns its validation
// loss (best epoch). A NumericError marks the trial as diverged; the search
// continues.
using TrialRunner = std::function<double(const TrainConfig&)>;

// Seeded random search. Configurations are drawn uniformly and deduplicated
// until the space is exhausted; trial t trains with seed `seed + t`.
SearchResult random_search(const SearchSpace& space, int n_trials, int budget_epochs,
                           uint64_t seed, const TrialRunner& run);

}  // namespace ralm
