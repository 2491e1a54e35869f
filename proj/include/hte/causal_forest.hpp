#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hte/metalearners.hpp"
#include "hte/trial_data.hpp"

namespace hte {

struct CausalTreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int parent = -1;
  double effect = 0.0;  // resolved leaf effect (estimate half, honest)
  // estimate-half tallies, kept for pruning and audits
  std::size_t n_treated = 0, n_control = 0;
  double sum_treated = 0.0, sum_control = 0.0;
};

struct CausalTree {
  std::vector<CausalTreeNode> nodes;
  std::vector<std::size_t> split_rows;     // disjoint from estimate_rows
  std::vector<std::size_t> estimate_rows;

  int leaf_for(std::span<const double> x) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
      const auto& node = nodes[static_cast<std::size_t>(id)];
      id = (x[static_cast<std::size_t>(node.feature)] <= node.threshold) ? node.left : node.right;
    }
    return id;
  }
};

struct CausalForestParams {
  int n_trees = 1000;
  int min_leaf_per_arm = 10;
  int mtry = 0;  // 0 = ceil(sqrt(p))
  double honesty_fraction = 0.5;
  double subsample_fraction = 0.5;  // without replacement
  int max_depth = -1;
};

// Honest causal forest: per tree, the rows that choose splits are disjoint
// from the rows that fill leaf effects. Splits maximize
// n_L * n_R * (tau_L - tau_R)^2 subject to per-arm leaf minima; leaves whose
// estimate-half counts fall below the minima inherit the nearest valid
// ancestor's effect.
class CausalForestModel final : public IteEstimator {
 public:
  CausalForestModel(std::vector<CausalTree> trees, CausalForestParams params,
                    std::size_t n_features, std::uint64_t seed)
      : trees_(std::move(trees)), params_(params), n_features_(n_features), seed_(seed) {}

  double predict_ite(std::span<const double> x) const override { return predict_tau(x); }
  double predict_tau(std::span<const double> x) const;

  const std::vector<CausalTree>& trees() const { return trees_; }
  const CausalForestParams& params() const { return params_; }
  std::size_t n_features() const { return n_features_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<CausalTree> trees_;
  CausalForestParams params_;
  std::size_t n_features_;
  std::uint64_t seed_;
};

CausalForestModel fit_causal_forest(const TrialDataset& data, const CausalForestParams& params,
                                    std::uint64_t seed);

}  // namespace hte
