#include "ralm/hpo.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "ralm/errors.hpp"
#include "ralm/rng.hpp"

namespace ralm {

size_t SearchSpace::cardinality() const {
  return optimizers.size() * learning_rates.size() * batch_sizes.size() *
         dropout_rates.size();
}

void SearchSpace::validate() const {
  if (optimizers.empty() || learning_rates.empty() || batch_sizes.empty() ||
      dropout_rates.empty()) {
    throw std::invalid_argument("search space lists must be non-empty");
  }
}

SearchResult random_search(const SearchSpace& space, int n_trials, int budget_epochs,
                           uint64_t seed, const TrialRunner& run) {
  space.validate();
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  if (budget_epochs < 1) throw std::invalid_argument("budget_epochs must be >= 1");

  RngStream rng(seed, RngPurpose::kSearch, 0);
  std::set<std::array<size_t, 4>> used;
  SearchResult result;
  double best = std::numeric_limits<double>::infinity();

  for (int t = 1; t <= n_trials; ++t) {
    std::array<size_t, 4> pick{};
    do {
      pick = {rng.uniform_index(space.optimizers.size()),
              rng.uniform_index(space.learning_rates.size()),
              rng.uniform_index(space.batch_sizes.size()),
              rng.uniform_index(space.dropout_rates.size())};
      // Duplicates are allowed only once every configuration has been tried.
    } while (used.count(pick) && used.size() < space.cardinality());
    used.insert(pick);

    TrialRecord rec;
    rec.trial = t;
    rec.config.optimizer = space.optimizers[pick[0]];
    rec.config.learning_rate = space.learning_rates[pick[1]];
    rec.config.batch_size = space.batch_sizes[pick[2]];
    rec.config.dropout_rate = space.dropout_rates[pick[3]];
    rec.config.epochs = budget_epochs;
    rec.config.seed = seed + static_cast<uint64_t>(t);

    try {
      rec.val_loss = run(rec.config);
      rec.val_rmse = std::sqrt(rec.val_loss);
    } catch (const NumericError&) {
      rec.val_loss = std::numeric_limits<double>::infinity();
      rec.val_rmse = std::numeric_limits<double>::infinity();
    }
    if (rec.val_loss < best) {
      best = rec.val_loss;
      result.best_trial = t;
    }
    result.trials.push_back(rec);
  }
  if (result.best_trial < 0) result.best_trial = 1;  // all diverged: earliest wins
  return result;
}

}  // namespace ralm
