#include "hte/metalearners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hte/rng.hpp"

namespace hte {

namespace {

double clip_ite(double v) { return std::clamp(v, -1.0, 1.0); }

void split_arms(const TrialDataset& data, std::vector<std::size_t>& treated,
                std::vector<std::size_t>& control) {
  for (std::size_t i = 0; i < data.n(); ++i) {
    (data.treatment[i] ? treated : control).push_back(i);
  }
  if (treated.empty() || control.empty()) {
    raise(ErrorCode::ArmEmpty, "both treatment arms are required");
  }
}

class TLearner final : public IteEstimator {
 public:
  TLearner(std::unique_ptr<ProbClassifier> mu0, std::unique_ptr<ProbClassifier> mu1)
      : mu0_(std::move(mu0)), mu1_(std::move(mu1)) {}

  double predict_ite(std::span<const double> x) const override {
    return mu1_->predict_proba(x) - mu0_->predict_proba(x);
  }
  bool has_arm_probs() const override { return true; }
  std::pair<double, double> arm_probs(std::span<const double> x) const override {
    return {mu0_->predict_proba(x), mu1_->predict_proba(x)};
  }

 private:
  std::unique_ptr<ProbClassifier> mu0_, mu1_;
};

class SLearner final : public IteEstimator {
 public:
  SLearner(std::unique_ptr<ProbClassifier> model, std::size_t n_features, bool interactions)
      : model_(std::move(model)), n_features_(n_features), interactions_(interactions) {}

  double predict_ite(std::span<const double> x) const override {
    const auto [mu0, mu1] = arm_probs(x);
    return mu1 - mu0;
  }
  bool has_arm_probs() const override { return true; }
  std::pair<double, double> arm_probs(std::span<const double> x) const override {
    return {predict_with_treatment(x, 0.0), predict_with_treatment(x, 1.0)};
  }

 private:
  double predict_with_treatment(std::span<const double> x, double t) const {
    std::vector<double> row(x.begin(), x.end());
    row.push_back(t);
    if (interactions_) {
      for (std::size_t j = 0; j < n_features_; ++j) row.push_back(t * x[j]);
    }
    return model_->predict_proba(row);
  }

  std::unique_ptr<ProbClassifier> model_;
  std::size_t n_features_;
  bool interactions_;
};

class XLearner final : public IteEstimator {
 public:
  XLearner(std::unique_ptr<Regressor> tau0, std::unique_ptr<Regressor> tau1, double g)
      : tau0_(std::move(tau0)), tau1_(std::move(tau1)), g_(g) {}

  double predict_ite(std::span<const double> x) const override {
    return clip_ite(g_ * tau0_->predict(x) + (1.0 - g_) * tau1_->predict(x));
  }

 private:
  std::unique_ptr<Regressor> tau0_, tau1_;
  double g_;
};

class DRLearner final : public IteEstimator {
 public:
  explicit DRLearner(std::unique_ptr<Regressor> final_stage) : final_(std::move(final_stage)) {}

  double predict_ite(std::span<const double> x) const override {
    return clip_ite(final_->predict(x));
  }

 private:
  std::unique_ptr<Regressor> final_;
};

}  // namespace

std::unique_ptr<IteEstimator> fit_t_learner(const TrialDataset& data, const LearnerSpec& base,
                                            std::uint64_t seed) {
  std::vector<std::size_t> treated, control;
  split_arms(data, treated, control);

  auto mu0 = fit_classifier(base, data.covariates.select_rows(control),
                            select(data.outcome, control), mix_seed(seed, 0));
  auto mu1 = fit_classifier(base, data.covariates.select_rows(treated),
                            select(data.outcome, treated), mix_seed(seed, 1));
  return std::make_unique<TLearner>(std::move(mu0), std::move(mu1));
}

std::unique_ptr<IteEstimator> fit_s_learner(const TrialDataset& data, const LearnerSpec& base,
                                            bool interactions, std::uint64_t seed) {
  std::vector<std::size_t> treated, control;
  split_arms(data, treated, control);

  // Interaction columns only make sense for the linear bases; trees model
  // treatment interactions natively.
  const bool use_interactions = interactions && (base.kind == LearnerKind::Logistic ||
                                                 base.kind == LearnerKind::PenalizedLogistic);

  const std::size_t n = data.n(), p = data.n_features();
  const std::size_t width = p + 1 + (use_interactions ? p : 0);
  Matrix design(n, width);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.covariates.row(i);
    const double t = static_cast<double>(data.treatment[i]);
    for (std::size_t j = 0; j < p; ++j) design(i, j) = row[j];
    design(i, p) = t;
    if (use_interactions) {
      for (std::size_t j = 0; j < p; ++j) design(i, p + 1 + j) = t * row[j];
    }
  }

  auto model = fit_classifier(base, design, data.outcome, seed);
  return std::make_unique<SLearner>(std::move(model), p, use_interactions);
}

std::unique_ptr<IteEstimator> fit_x_learner(const TrialDataset& data,
                                            const LearnerSpec& outcome_base,
                                            const LearnerSpec& effect_base, double g,
                                            std::uint64_t seed) {
  if (!(g >= 0.0 && g <= 1.0)) raise(ErrorCode::InvalidArgument, "g outside [0,1]");
  std::vector<std::size_t> treated, control;
  split_arms(data, treated, control);

  const Matrix x_treated = data.covariates.select_rows(treated);
  const Matrix x_control = data.covariates.select_rows(control);

  auto mu0 = fit_classifier(outcome_base, x_control, select(data.outcome, control),
                            mix_seed(seed, 0));
  auto mu1 = fit_classifier(outcome_base, x_treated, select(data.outcome, treated),
                            mix_seed(seed, 1));

  // Imputed effects: D1 = Y - mu0(x) on treated, D0 = mu1(x) - Y on control.
  std::vector<double> d1(treated.size()), d0(control.size());
  for (std::size_t i = 0; i < treated.size(); ++i) {
    d1[i] = static_cast<double>(data.outcome[treated[i]]) - mu0->predict_proba(x_treated.row(i));
  }
  for (std::size_t i = 0; i < control.size(); ++i) {
    d0[i] = mu1->predict_proba(x_control.row(i)) - static_cast<double>(data.outcome[control[i]]);
  }

  auto tau1 = fit_effect_regressor(effect_base, x_treated, d1, mix_seed(seed, 2));
  auto tau0 = fit_effect_regressor(effect_base, x_control, d0, mix_seed(seed, 3));
  return std::make_unique<XLearner>(std::move(tau0), std::move(tau1), g);
}

std::vector<double> dr_pseudo_outcomes(const TrialDataset& data, const LearnerSpec& outcome_base,
                                       double propensity, int folds, std::uint64_t seed) {
  const std::size_t n = data.n();
  const double e = propensity > 0.0
                       ? propensity
                       : static_cast<double>(data.n_treated()) / static_cast<double>(n);
  if (!(e > 0.0 && e < 1.0)) raise(ErrorCode::InvalidArgument, "propensity outside (0,1)");
  if (folds < 2) raise(ErrorCode::InvalidArgument, "folds must be >= 2");

  Rng rng(mix_seed(seed, hash_str("dr_folds")));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = static_cast<int>(i % folds);

  std::vector<double> phi(n, 0.0);
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> fit_treated, fit_control, held;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == fold) {
        held.push_back(i);
      } else {
        (data.treatment[i] ? fit_treated : fit_control).push_back(i);
      }
    }
    if (fit_treated.empty() || fit_control.empty()) {
      raise(ErrorCode::ArmEmpty, "cross-fitting fold lost an arm");
    }
    auto mu0 = fit_classifier(outcome_base, data.covariates.select_rows(fit_control),
                              select(data.outcome, fit_control), mix_seed(seed, 10 + fold * 2));
    auto mu1 = fit_classifier(outcome_base, data.covariates.select_rows(fit_treated),
                              select(data.outcome, fit_treated),
                              mix_seed(seed, 11 + fold * 2));
    for (std::size_t i : held) {
      const auto x = data.covariates.row(i);
      const double m0 = mu0->predict_proba(x);
      const double m1 = mu1->predict_proba(x);
      const double t = static_cast<double>(data.treatment[i]);
      const double y = static_cast<double>(data.outcome[i]);
      const double fitted = data.treatment[i] ? m1 : m0;
      phi[i] = (t - e) / (e * (1.0 - e)) * (y - fitted) + m1 - m0;
    }
  }
  return phi;
}

std::unique_ptr<IteEstimator> fit_dr_learner(const TrialDataset& data,
                                             const LearnerSpec& outcome_base,
                                             const LearnerSpec& final_base, double propensity,
                                             int folds, std::uint64_t seed) {
  std::vector<std::size_t> treated, control;
  split_arms(data, treated, control);

  const std::vector<double> phi = dr_pseudo_outcomes(data, outcome_base, propensity, folds, seed);
  auto final_stage =
      fit_effect_regressor(final_base, data.covariates, phi, mix_seed(seed, hash_str("dr_final")));
  return std::make_unique<DRLearner>(std::move(final_stage));
}

}  // namespace hte
