#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "hte/base_learners.hpp"
#include "hte/error.hpp"
#include "hte/trial_data.hpp"

namespace hte {

// Fitted ITE model. predict_ite is in [-1,1]; estimators built from two arm
// probability models also expose (mu0, mu1), and then
// predict_ite(x) == mu1(x) - mu0(x) exactly.
struct IteEstimator {
  virtual ~IteEstimator() = default;

  virtual double predict_ite(std::span<const double> x) const = 0;
  virtual bool has_arm_probs() const { return false; }
  virtual std::pair<double, double> arm_probs(std::span<const double> /*x*/) const {
    raise(ErrorCode::Unavailable, "estimator does not expose arm probabilities");
  }

  std::vector<double> predict_ite_rows(const Matrix& X) const {
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_ite(X.row(i));
    return out;
  }
};

// Two arm-wise outcome models of the same base-learner type.
std::unique_ptr<IteEstimator> fit_t_learner(const TrialDataset& data, const LearnerSpec& base,
                                            std::uint64_t seed);

// Single model on [X, T]; linear bases optionally add T*X interaction columns.
std::unique_ptr<IteEstimator> fit_s_learner(const TrialDataset& data, const LearnerSpec& base,
                                            bool interactions, std::uint64_t seed);

// Stage-1 outcome models, stage-2 regressions of imputed effects, blended by
// weight g (g * tau0 + (1-g) * tau1). The blended effect regression is the
// ITE, so arm probabilities are not exposed.
std::unique_ptr<IteEstimator> fit_x_learner(const TrialDataset& data,
                                            const LearnerSpec& outcome_base,
                                            const LearnerSpec& effect_base, double g,
                                            std::uint64_t seed);

// Cross-fitted doubly robust pseudo-outcome regression. propensity <= 0 uses
// the observed randomization fraction.
std::unique_ptr<IteEstimator> fit_dr_learner(const TrialDataset& data,
                                             const LearnerSpec& outcome_base,
                                             const LearnerSpec& final_base, double propensity,
                                             int folds, std::uint64_t seed);

// The cross-fitted pseudo-outcomes for one dataset (exposed for tests).
std::vector<double> dr_pseudo_outcomes(const TrialDataset& data, const LearnerSpec& outcome_base,
                                       double propensity, int folds, std::uint64_t seed);

}  // namespace hte
