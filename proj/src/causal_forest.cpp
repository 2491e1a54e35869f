#include "hte/causal_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hte/error.hpp"
#include "hte/rng.hpp"
#include "hte/threading.hpp"

namespace hte {

namespace {

struct ArmTally {
  std::size_t n1 = 0, n0 = 0;
  double sum1 = 0.0, sum0 = 0.0;

  void add(int treatment, int outcome) {
    if (treatment) {
      ++n1;
      sum1 += outcome;
    } else {
      ++n0;
      sum0 += outcome;
    }
  }
  double effect() const {
    return sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0);
  }
};

struct NodeTask {
  int node_id;
  std::size_t begin, end;
  int depth;
};

CausalTree build_causal_tree(const TrialDataset& data, const CausalForestParams& params,
                             int mtry, Rng& rng) {
  const std::size_t n = data.n();
  const std::size_t subsample =
      std::max<std::size_t>(2, static_cast<std::size_t>(
                                   std::floor(static_cast<double>(n) * params.subsample_fraction)));
  const std::size_t min_arm = static_cast<std::size_t>(params.min_leaf_per_arm);

  CausalTree tree;
  // Redraw until the estimate half can support a root effect; the draw order
  // itself is the pre-shuffle that decouples halves from input row order.
  constexpr int kMaxDraws = 100;
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxDraws) {
      raise(ErrorCode::ArmTooSmall, "subsample cannot satisfy per-arm minima");
    }
    std::vector<std::size_t> drawn = rng.sample_without_replacement(n, subsample);
    std::size_t n_split =
        static_cast<std::size_t>(std::floor(static_cast<double>(subsample) * params.honesty_fraction));
    n_split = std::clamp<std::size_t>(n_split, 1, subsample - 1);

    tree.split_rows.assign(drawn.begin(), drawn.begin() + static_cast<long>(n_split));
    tree.estimate_rows.assign(drawn.begin() + static_cast<long>(n_split), drawn.end());

    ArmTally split_root, estimate_root;
    for (std::size_t i : tree.split_rows) split_root.add(data.treatment[i], data.outcome[i]);
    for (std::size_t i : tree.estimate_rows) estimate_root.add(data.treatment[i], data.outcome[i]);
    if (split_root.n1 >= min_arm && split_root.n0 >= min_arm && estimate_root.n1 >= min_arm &&
        estimate_root.n0 >= min_arm) {
      break;
    }
  }

  // Grow on the split half, maximizing n_L * n_R * (tau_L - tau_R)^2.
  std::vector<std::size_t> rows = tree.split_rows;
  tree.nodes.push_back(CausalTreeNode{});
  std::vector<NodeTask> stack{{0, 0, rows.size(), 0}};
  std::vector<std::pair<double, std::size_t>> sorted;

  while (!stack.empty()) {
    const NodeTask task = stack.back();
    stack.pop_back();
    const std::size_t count = task.end - task.begin;

    const bool depth_ok = params.max_depth < 0 || task.depth < params.max_depth;
    bool split_found = false;
    int best_feature = -1;
    double best_threshold = 0.0, best_criterion = 0.0;

    if (depth_ok && count >= 4 * min_arm) {
      const std::vector<std::size_t> features =
          rng.sample_without_replacement(data.n_features(), static_cast<std::size_t>(mtry));
      for (std::size_t f : features) {
        sorted.clear();
        for (std::size_t i = task.begin; i < task.end; ++i) {
          sorted.emplace_back(data.covariates(rows[i], f), rows[i]);
        }
        std::sort(sorted.begin(), sorted.end());
        if (sorted.front().first == sorted.back().first) continue;

        ArmTally total;
        for (const auto& [value, row] : sorted) total.add(data.treatment[row], data.outcome[row]);

        ArmTally left;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
          const std::size_t row = sorted[i].second;
          left.add(data.treatment[row], data.outcome[row]);
          if (sorted[i].first == sorted[i + 1].first) continue;
          const std::size_t right_n1 = total.n1 - left.n1, right_n0 = total.n0 - left.n0;
          if (left.n1 < min_arm || left.n0 < min_arm || right_n1 < min_arm ||
              right_n0 < min_arm) {
            continue;
          }
          const double tau_left = left.effect();
          const double tau_right = (total.sum1 - left.sum1) / static_cast<double>(right_n1) -
                                   (total.sum0 - left.sum0) / static_cast<double>(right_n0);
          const double n_left = static_cast<double>(i + 1);
          const double n_right = static_cast<double>(count - i - 1);
          const double criterion =
              n_left * n_right * (tau_left - tau_right) * (tau_left - tau_right);
          if (criterion > best_criterion + 1e-12) {
            best_criterion = criterion;
            best_feature = static_cast<int>(f);
            best_threshold = sorted[i].first;
            split_found = true;
          }
        }
      }
    }

    if (!split_found) continue;  // node stays a leaf

    const auto mid = std::stable_partition(
        rows.begin() + static_cast<long>(task.begin), rows.begin() + static_cast<long>(task.end),
        [&](std::size_t r) {
          return data.covariates(r, static_cast<std::size_t>(best_feature)) <= best_threshold;
        });
    const std::size_t split_at = static_cast<std::size_t>(mid - rows.begin());

    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(CausalTreeNode{});
    const int right_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(CausalTreeNode{});
    auto& node = tree.nodes[static_cast<std::size_t>(task.node_id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_id;
    node.right = right_id;
    tree.nodes[static_cast<std::size_t>(left_id)].parent = task.node_id;
    tree.nodes[static_cast<std::size_t>(right_id)].parent = task.node_id;

    stack.push_back({right_id, split_at, task.end, task.depth + 1});
    stack.push_back({left_id, task.begin, split_at, task.depth + 1});
  }

  // Populate every node's tallies from the disjoint estimate half.
  for (std::size_t row : tree.estimate_rows) {
    const auto x = data.covariates.row(row);
    int id = 0;
    for (;;) {
      auto& node = tree.nodes[static_cast<std::size_t>(id)];
      if (data.treatment[row]) {
        ++node.n_treated;
        node.sum_treated += data.outcome[row];
      } else {
        ++node.n_control;
        node.sum_control += data.outcome[row];
      }
      if (node.feature < 0) break;
      id = (x[static_cast<std::size_t>(node.feature)] <= node.threshold) ? node.left : node.right;
    }
  }

  // Leaves short of the per-arm minima inherit the nearest valid ancestor.
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    auto& node = tree.nodes[id];
    if (node.feature >= 0) continue;
    int source = static_cast<int>(id);
    while (source >= 0) {
      const auto& candidate = tree.nodes[static_cast<std::size_t>(source)];
      if (candidate.n_treated >= min_arm && candidate.n_control >= min_arm) break;
      source = candidate.parent;
    }
    const auto& chosen = tree.nodes[static_cast<std::size_t>(source)];
    node.effect = chosen.sum_treated / static_cast<double>(chosen.n_treated) -
                  chosen.sum_control / static_cast<double>(chosen.n_control);
  }
  return tree;
}

}  // namespace

CausalForestModel fit_causal_forest(const TrialDataset& data, const CausalForestParams& params,
                                    std::uint64_t seed) {
  if (params.n_trees < 1) raise(ErrorCode::InvalidArgument, "n_trees must be >= 1");
  if (!(params.honesty_fraction > 0.0 && params.honesty_fraction < 1.0)) {
    raise(ErrorCode::InvalidArgument, "honesty_fraction outside (0,1)");
  }
  if (!(params.subsample_fraction > 0.0 && params.subsample_fraction <= 1.0)) {
    raise(ErrorCode::InvalidArgument, "subsample_fraction outside (0,1]");
  }
  const std::size_t min_arm = static_cast<std::size_t>(params.min_leaf_per_arm);
  std::size_t treated = data.n_treated();
  std::size_t control = data.n() - treated;
  if (treated < 2 * min_arm || control < 2 * min_arm) {
    raise(ErrorCode::ArmTooSmall, "each arm needs at least 2 * min_leaf_per_arm patients");
  }

  int mtry = params.mtry;
  if (mtry == 0) {
    mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(data.n_features()))));
  }
  mtry = std::min<int>(mtry, static_cast<int>(data.n_features()));

  std::vector<CausalTree> trees(static_cast<std::size_t>(params.n_trees));
  parallel_for(trees.size(), [&](std::size_t t) {
    Rng rng(mix_seed(seed, t));
    trees[t] = build_causal_tree(data, params, mtry, rng);
  });
  return CausalForestModel(std::move(trees), params, data.n_features(), seed);
}

double CausalForestModel::predict_tau(std::span<const double> x) const {
  if (x.size() != n_features_) {
    raise(ErrorCode::ShapeMismatch, "input width != trained feature width");
  }
  double sum = 0.0;
  for (const auto& tree : trees_) {
    sum += tree.nodes[static_cast<std::size_t>(tree.leaf_for(x))].effect;
  }
  return sum / static_cast<double>(trees_.size());
}

}  // namespace hte
