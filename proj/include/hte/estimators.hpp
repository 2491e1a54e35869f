#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hte/base_learners.hpp"
#include "hte/causal_forest.hpp"
#include "hte/metalearners.hpp"
#include "hte/trial_data.hpp"

namespace hte {

// One named ITE estimator: "<meta>.<base>" (t_learner / s_learner / x_learner
// / dr_learner over logistic, penalized_logistic, tree, random_forest,
// gradient_boosting) or "causal_forest".
struct EstimatorConfig {
  std::string name;
  LearnerSpec base;
  LearnerSpec effect_base;       // X stage-2 / DR final stage
  bool effect_base_set = false;  // false → same family as base
  bool s_interactions = true;
  double x_weight_g = 0.5;
  double propensity = 0.0;  // <= 0 → observed randomization fraction
  int dr_folds = 2;
  CausalForestParams causal_forest;
};

std::unique_ptr<IteEstimator> fit_named_estimator(const EstimatorConfig& config,
                                                  const TrialDataset& data, std::uint64_t seed);

std::vector<std::string> registered_estimator_names();

}  // namespace hte
