#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hte/matrix.hpp"

namespace hte {

inline double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Clip before any logit transform; keeps downstream metrics finite.
inline double clip_probability(double p) {
  constexpr double eps = 1e-6;
  if (p < eps) return eps;
  if (p > 1.0 - eps) return 1.0 - eps;
  return p;
}

inline double logit(double p) {
  const double q = clip_probability(p);
  return std::log(q / (1.0 - q));
}

// Probabilistic binary classifier; fitted state is immutable.
struct ProbClassifier {
  virtual ~ProbClassifier() = default;
  virtual double predict_proba(std::span<const double> x) const = 0;

  std::vector<double> predict_proba_rows(const Matrix& X) const {
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_proba(X.row(i));
    return out;
  }
};

// Real-valued regressor used for effect and pseudo-outcome regressions.
struct Regressor {
  virtual ~Regressor() = default;
  virtual double predict(std::span<const double> x) const = 0;

  std::vector<double> predict_rows(const Matrix& X) const {
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict(X.row(i));
    return out;
  }
};

// ---------------------------------------------------------------------------
// Logistic regression (IRLS)

struct LogisticModel final : ProbClassifier {
  std::vector<double> coefficients;  // [intercept, w_1, ..., w_p]
  bool converged = false;
  int iterations = 0;

  double linear_predictor(std::span<const double> x) const {
    double eta = coefficients[0];
    for (std::size_t j = 0; j + 1 < coefficients.size(); ++j) eta += coefficients[j + 1] * x[j];
    return eta;
  }
  double predict_proba(std::span<const double> x) const override {
    return expit(linear_predictor(x));
  }
};

// Maximizes the Bernoulli log-likelihood minus ridge_eps*||w||^2/2 (intercept
// unpenalized). Converged when max |score| < 1e-8 or after 100 iterations.
// On a singular system the ridge is raised to 1e-4 before erroring.
LogisticModel fit_logistic(const Matrix& X, const std::vector<int>& y, double ridge_eps = 1e-8);

// Weighted variant used by boosting-style internals and curve fits.
LogisticModel fit_logistic_weighted(const Matrix& X, const std::vector<double>& y,
                                    const std::vector<double>& weights, double ridge_eps);

// Observed-information matrix (X'WX + ridge) at the fitted coefficients,
// intercept included; used for Wald bands.
std::vector<double> logistic_information(const LogisticModel& model, const Matrix& X,
                                         double ridge_eps = 1e-8);

// ---------------------------------------------------------------------------
// Elastic-net penalized logistic regression

struct ElasticNetLogisticModel final : ProbClassifier {
  std::vector<double> coefficients;  // original scale: [intercept, w_1..w_p]
  double alpha = 0.5;                // 1 = lasso, 0 = ridge
  double lambda = 0.0;               // selected penalty
  std::vector<double> feature_means;
  std::vector<double> feature_scales;
  std::vector<double> lambda_grid;
  std::vector<double> cv_deviance;  // mean held-out deviance per grid point

  double predict_proba(std::span<const double> x) const override {
    double eta = coefficients[0];
    for (std::size_t j = 0; j + 1 < coefficients.size(); ++j) eta += coefficients[j + 1] * x[j];
    return expit(eta);
  }
};

// Coordinate-descent elastic net over an internally standardized design.
// Empty lambda_grid: 50 log-spaced points from lambda_max down 4 decades.
// Lambda selected by cv_folds-fold deviance, ties toward more penalty.
ElasticNetLogisticModel fit_elastic_net_logistic(const Matrix& X, const std::vector<int>& y,
                                                 double alpha,
                                                 std::vector<double> lambda_grid,
                                                 int cv_folds, std::uint64_t seed);

// Largest lambda with any active coefficient (alpha floored at 1e-3 for the
// ridge end of the grid).
double elastic_net_lambda_max(const Matrix& X, const std::vector<int>& y, double alpha);

// ---------------------------------------------------------------------------
// Tree ensembles (bagged forests and second-order boosting)

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf mean (Bagged) or leaf score (Boosted)
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const {
    int id = 0;
    while (nodes[id].feature >= 0) {
      id = (x[static_cast<std::size_t>(nodes[id].feature)] <= nodes[id].threshold)
               ? nodes[id].left
               : nodes[id].right;
    }
    return nodes[id].value;
  }
};

struct TreeEnsembleModel final : ProbClassifier, Regressor {
  enum class Mode { Bagged, Boosted };

  std::vector<Tree> trees;
  Mode mode = Mode::Bagged;
  double learning_rate = 0.1;  // Boosted only
  double base_score = 0.0;     // Boosted only (log-odds offset)
  std::uint64_t seed = 0;

  // Bagged: mean of leaf values. Boosted: expit(base + lr * sum of scores).
  double predict_value(std::span<const double> x) const {
    if (mode == Mode::Bagged) {
      double sum = 0.0;
      for (const auto& tree : trees) sum += tree.predict(x);
      return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
    }
    double score = base_score;
    for (const auto& tree : trees) score += learning_rate * tree.predict(x);
    return expit(score);
  }

  double predict_proba(std::span<const double> x) const override { return predict_value(x); }
  double predict(std::span<const double> x) const override { return predict_value(x); }
};

struct ForestParams {
  int n_trees = 500;
  int max_depth = -1;  // -1 = unlimited
  int min_leaf = 10;
  int mtry = 0;  // 0 = ceil(sqrt(p))
  bool bootstrap = true;
};

// Bagged trees on a binary target; Gini splits (variance form), per-leaf
// event fractions, per-tree seeds derived from `seed`.
TreeEnsembleModel fit_random_forest(const Matrix& X, const std::vector<int>& y,
                                    const ForestParams& params, std::uint64_t seed);

// Same machinery on a continuous target (variance splits, leaf means).
TreeEnsembleModel fit_regression_forest(const Matrix& X, const std::vector<double>& target,
                                        const ForestParams& params, std::uint64_t seed);

struct BoostParams {
  int n_rounds = 200;
  int max_depth = 3;
  int min_leaf = 1;
  double learning_rate = 0.1;
  double leaf_penalty = 1.0;  // L2 on leaf scores
};

// Stagewise trees on the gradient/hessian of the logistic loss; leaf score
// -G/(H+penalty); base score = logit of the base rate.
TreeEnsembleModel fit_gradient_boosted_trees(const Matrix& X, const std::vector<int>& y,
                                             const BoostParams& params, std::uint64_t seed);

// Single unbagged tree (mtry = all features).
TreeEnsembleModel fit_decision_tree(const Matrix& X, const std::vector<int>& y, int max_depth,
                                    int min_leaf);

// ---------------------------------------------------------------------------
// Linear least squares (ridge-stabilized), for effect regressions.

struct LinearRegressionModel final : Regressor {
  std::vector<double> coefficients;  // [intercept, w_1..w_p]

  double predict(std::span<const double> x) const override {
    double out = coefficients[0];
    for (std::size_t j = 0; j + 1 < coefficients.size(); ++j) out += coefficients[j + 1] * x[j];
    return out;
  }
};

LinearRegressionModel fit_linear_regression(const Matrix& X, const std::vector<double>& y,
                                            double ridge_eps = 1e-8);

// ---------------------------------------------------------------------------
// Learner specs: how meta-learners and the CLI name their plug-ins.

enum class LearnerKind {
  Logistic,
  PenalizedLogistic,
  DecisionTree,
  RandomForest,
  GradientBoosting,
};

LearnerKind learner_kind_from_string(const std::string& name);
std::string learner_kind_name(LearnerKind kind);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::Logistic;
  double ridge_eps = 1e-8;
  double alpha = 0.5;  // elastic-net mixing
  int cv_folds = 5;
  ForestParams forest;
  BoostParams boost;
  int tree_max_depth = -1;  // single decision tree
  int tree_min_leaf = 10;
};

std::unique_ptr<ProbClassifier> fit_classifier(const LearnerSpec& spec, const Matrix& X,
                                               const std::vector<int>& y, std::uint64_t seed);

// Regression plug-in for imputed-effect / pseudo-outcome stages. Logistic and
// PenalizedLogistic map to ridge-stabilized linear least squares.
std::unique_ptr<Regressor> fit_effect_regressor(const LearnerSpec& spec, const Matrix& X,
                                                const std::vector<double>& target,
                                                std::uint64_t seed);

}  // namespace hte
