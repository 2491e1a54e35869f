#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hte/base_learners.hpp"
#include "hte/error.hpp"
#include "hte/rng.hpp"
#include "hte/threading.hpp"

namespace hte {

namespace {

// Shared greedy builder. Bagged trees use g = target, h = 1, leaf = G/H;
// boosted trees use loss gradients/hessians, leaf = -G/(H+penalty). The gain
// sum(G_c^2/(H_c+penalty)) is the variance-reduction criterion for h = 1 and
// matches the Gini ordering on binary targets.
struct TreeBuildConfig {
  int max_depth = -1;
  int min_leaf = 1;
  int mtry = 0;  // 0 = all features
  double leaf_penalty = 0.0;
  bool boosted = false;
};

struct NodeTask {
  int node_id;
  std::size_t begin, end;  // row-buffer range
  int depth;
};

Tree build_tree(const Matrix& X, const std::vector<double>& g, const std::vector<double>& h,
                std::vector<std::size_t> rows, const TreeBuildConfig& config, Rng& rng) {
  const std::size_t p = X.cols();
  Tree tree;

  auto leaf_value = [&](double sum_g, double sum_h) {
    if (config.boosted) return -sum_g / (sum_h + config.leaf_penalty);
    return sum_h > 0.0 ? sum_g / sum_h : 0.0;
  };
  auto node_score = [&](double sum_g, double sum_h) {
    return sum_g * sum_g / (sum_h + config.leaf_penalty);
  };

  tree.nodes.push_back(TreeNode{});
  std::vector<NodeTask> stack{{0, 0, rows.size(), 0}};
  std::vector<std::pair<double, std::size_t>> sorted;  // (value, row)

  while (!stack.empty()) {
    const NodeTask task = stack.back();
    stack.pop_back();
    const std::size_t count = task.end - task.begin;

    double sum_g = 0.0, sum_h = 0.0;
    for (std::size_t i = task.begin; i < task.end; ++i) {
      sum_g += g[rows[i]];
      sum_h += h[rows[i]];
    }

    const bool depth_ok = config.max_depth < 0 || task.depth < config.max_depth;
    bool split_found = false;
    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 0.0;

    if (depth_ok && count >= 2 * static_cast<std::size_t>(config.min_leaf)) {
      std::vector<std::size_t> features;
      if (config.mtry <= 0 || static_cast<std::size_t>(config.mtry) >= p) {
        features.resize(p);
        std::iota(features.begin(), features.end(), 0);
      } else {
        features = rng.sample_without_replacement(p, static_cast<std::size_t>(config.mtry));
      }

      const double parent_score = node_score(sum_g, sum_h);
      for (std::size_t f : features) {
        sorted.clear();
        for (std::size_t i = task.begin; i < task.end; ++i) {
          sorted.emplace_back(X(rows[i], f), rows[i]);
        }
        std::sort(sorted.begin(), sorted.end());
        if (sorted.front().first == sorted.back().first) continue;

        double left_g = 0.0, left_h = 0.0;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
          left_g += g[sorted[i].second];
          left_h += h[sorted[i].second];
          if (sorted[i].first == sorted[i + 1].first) continue;
          const std::size_t n_left = i + 1, n_right = count - n_left;
          if (n_left < static_cast<std::size_t>(config.min_leaf) ||
              n_right < static_cast<std::size_t>(config.min_leaf)) {
            continue;
          }
          const double gain = node_score(left_g, left_h) +
                              node_score(sum_g - left_g, sum_h - left_h) - parent_score;
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_threshold = sorted[i].first;  // route left when x <= threshold
            split_found = true;
          }
        }
      }
    }

    if (!split_found) {
      tree.nodes[task.node_id].feature = -1;
      tree.nodes[task.node_id].value = leaf_value(sum_g, sum_h);
      continue;
    }

    const auto mid = std::stable_partition(
        rows.begin() + static_cast<long>(task.begin), rows.begin() + static_cast<long>(task.end),
        [&](std::size_t r) { return X(r, static_cast<std::size_t>(best_feature)) <= best_threshold; });
    const std::size_t split_at = static_cast<std::size_t>(mid - rows.begin());

    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    const int right_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes[task.node_id].feature = best_feature;
    tree.nodes[task.node_id].threshold = best_threshold;
    tree.nodes[task.node_id].left = left_id;
    tree.nodes[task.node_id].right = right_id;

    stack.push_back({right_id, split_at, task.end, task.depth + 1});
    stack.push_back({left_id, task.begin, split_at, task.depth + 1});
  }
  return tree;
}

TreeEnsembleModel fit_bagged_forest(const Matrix& X, const std::vector<double>& target,
                                    const ForestParams& params, std::uint64_t seed) {
  if (params.n_trees < 1) raise(ErrorCode::InvalidArgument, "n_trees must be >= 1");
  if (params.min_leaf < 1) raise(ErrorCode::InvalidArgument, "min_leaf must be >= 1");
  const std::size_t n = X.rows(), p = X.cols();
  if (target.size() != n) raise(ErrorCode::LengthMismatch, "target length != rows");

  int mtry = params.mtry;
  if (mtry == 0) mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
  mtry = std::min<int>(mtry, static_cast<int>(p));

  TreeBuildConfig config;
  config.max_depth = params.max_depth;
  config.min_leaf = params.min_leaf;
  config.mtry = mtry;
  config.boosted = false;

  const std::vector<double> ones(n, 1.0);
  TreeEnsembleModel model;
  model.mode = TreeEnsembleModel::Mode::Bagged;
  model.seed = seed;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));

  parallel_for(static_cast<std::size_t>(params.n_trees), [&](std::size_t t) {
    Rng rng(mix_seed(seed, t));
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) rows[i] = rng.uniform_below(n);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    model.trees[t] = build_tree(X, target, ones, std::move(rows), config, rng);
  });
  return model;
}

}  // namespace

TreeEnsembleModel fit_random_forest(const Matrix& X, const std::vector<int>& y,
                                    const ForestParams& params, std::uint64_t seed) {
  std::vector<double> target(y.begin(), y.end());
  return fit_bagged_forest(X, target, params, seed);
}

TreeEnsembleModel fit_regression_forest(const Matrix& X, const std::vector<double>& target,
                                        const ForestParams& params, std::uint64_t seed) {
  return fit_bagged_forest(X, target, params, seed);
}

TreeEnsembleModel fit_gradient_boosted_trees(const Matrix& X, const std::vector<int>& y,
                                             const BoostParams& params, std::uint64_t seed) {
  if (params.n_rounds < 1) raise(ErrorCode::InvalidArgument, "n_rounds must be >= 1");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
    raise(ErrorCode::InvalidArgument, "learning_rate outside (0,1]");
  }
  const std::size_t n = X.rows();
  if (y.size() != n) raise(ErrorCode::LengthMismatch, "target length != rows");

  double base_rate = 0.0;
  for (int v : y) base_rate += v;
  base_rate /= static_cast<double>(n);

  TreeEnsembleModel model;
  model.mode = TreeEnsembleModel::Mode::Boosted;
  model.learning_rate = params.learning_rate;
  model.base_score = logit(base_rate);
  model.seed = seed;

  TreeBuildConfig config;
  config.max_depth = params.max_depth;
  config.min_leaf = params.min_leaf;
  config.mtry = 0;
  config.leaf_penalty = params.leaf_penalty;
  config.boosted = true;

  Rng rng(seed);
  std::vector<double> score(n, model.base_score), grad(n), hess(n);
  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);

  for (int round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double prob = expit(score[i]);
      grad[i] = prob - static_cast<double>(y[i]);
      hess[i] = std::max(prob * (1.0 - prob), 1e-12);
      if (!std::isfinite(score[i])) raise(ErrorCode::NonFinite, "boosting score overflow");
    }
    Tree tree = build_tree(X, grad, hess, all_rows, config, rng);
    for (std::size_t i = 0; i < n; ++i) {
      score[i] += params.learning_rate * tree.predict(X.row(i));
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

TreeEnsembleModel fit_decision_tree(const Matrix& X, const std::vector<int>& y, int max_depth,
                                    int min_leaf) {
  ForestParams params;
  params.n_trees = 1;
  params.max_depth = max_depth;
  params.min_leaf = min_leaf;
  params.mtry = static_cast<int>(X.cols());
  params.bootstrap = false;
  return fit_random_forest(X, y, params, 0);
}

LearnerKind learner_kind_from_string(const std::string& name) {
  if (name == "logistic") return LearnerKind::Logistic;
  if (name == "penalized_logistic") return LearnerKind::PenalizedLogistic;
  if (name == "tree" || name == "decision_tree") return LearnerKind::DecisionTree;
  if (name == "random_forest") return LearnerKind::RandomForest;
  if (name == "gradient_boosting" || name == "xgboost") return LearnerKind::GradientBoosting;
  raise(ErrorCode::UnknownKind, "unknown base learner '" + name + "'");
}

std::string learner_kind_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Logistic: return "logistic";
    case LearnerKind::PenalizedLogistic: return "penalized_logistic";
    case LearnerKind::DecisionTree: return "tree";
    case LearnerKind::RandomForest: return "random_forest";
    case LearnerKind::GradientBoosting: return "gradient_boosting";
  }
  return "unknown";
}

std::unique_ptr<ProbClassifier> fit_classifier(const LearnerSpec& spec, const Matrix& X,
                                               const std::vector<int>& y, std::uint64_t seed) {
  switch (spec.kind) {
    case LearnerKind::Logistic:
      return std::make_unique<LogisticModel>(fit_logistic(X, y, spec.ridge_eps));
    case LearnerKind::PenalizedLogistic:
      return std::make_unique<ElasticNetLogisticModel>(
          fit_elastic_net_logistic(X, y, spec.alpha, {}, spec.cv_folds, seed));
    case LearnerKind::DecisionTree:
      return std::make_unique<TreeEnsembleModel>(
          fit_decision_tree(X, y, spec.tree_max_depth, spec.tree_min_leaf));
    case LearnerKind::RandomForest:
      return std::make_unique<TreeEnsembleModel>(fit_random_forest(X, y, spec.forest, seed));
    case LearnerKind::GradientBoosting:
      return std::make_unique<TreeEnsembleModel>(
          fit_gradient_boosted_trees(X, y, spec.boost, seed));
  }
  raise(ErrorCode::UnknownKind, "unhandled learner kind");
}

std::unique_ptr<Regressor> fit_effect_regressor(const LearnerSpec& spec, const Matrix& X,
                                                const std::vector<double>& target,
                                                std::uint64_t seed) {
  switch (spec.kind) {
    case LearnerKind::Logistic:
    case LearnerKind::PenalizedLogistic:
      return std::make_unique<LinearRegressionModel>(fit_linear_regression(X, target));
    case LearnerKind::DecisionTree: {
      ForestParams params;
      params.n_trees = 1;
      params.max_depth = spec.tree_max_depth;
      params.min_leaf = spec.tree_min_leaf;
      params.mtry = static_cast<int>(X.cols());
      params.bootstrap = false;
      return std::make_unique<TreeEnsembleModel>(
          fit_regression_forest(X, target, params, seed));
    }
    case LearnerKind::RandomForest:
      return std::make_unique<TreeEnsembleModel>(
          fit_regression_forest(X, target, spec.forest, seed));
    case LearnerKind::GradientBoosting:
      raise(ErrorCode::ConfigInvalid, "gradient boosting is not an effect-regression base");
  }
  raise(ErrorCode::UnknownKind, "unhandled learner kind");
}

}  // namespace hte
