#include "hte/simulation_study.hpp"

#include <algorithm>
#include <chrono>

#include "hte/base_learners.hpp"
#include "hte/error.hpp"
#include "hte/rng.hpp"

namespace hte {

namespace {

// Predicts the generator's true ITE from the covariate row; needs every
// feature visible.
class DgpOracleEstimator final : public IteEstimator {
 public:
  explicit DgpOracleEstimator(const DgpConfig& config) : config_(config) {
    if (config.visible_features &&
        config.visible_features->size() != config.p()) {
      raise(ErrorCode::Unavailable, "oracle needs all DGP features visible");
    }
  }

  double predict_ite(std::span<const double> x) const override {
    double eta = config_.beta0;
    double delta = config_.gamma0;
    for (std::size_t j = 0; j < config_.p(); ++j) {
      eta += config_.beta[j] * x[j];
      delta += config_.gamma[j] * x[j];
    }
    return expit(eta + delta) - expit(eta);
  }

 private:
  DgpConfig config_;
};

RunResult run_oracle_case(const ValidationPlan& plan, const DgpConfig& config, int replicate) {
  RunResult result;
  result.estimator = "oracle";
  result.replicate = replicate;
  result.split_label = "split-" + std::to_string(replicate);
  const auto started = std::chrono::steady_clock::now();
  try {
    const TrialDataset& full = plan.datasets.front();
    const SplitAssignment split =
        random_split(full, plan.train_fraction, plan_split_seed(plan.master_seed, replicate));
    const TrialDataset train = full.subset(split.train_indices);
    const TrialDataset test = full.subset(split.test_indices);
    result.train_indices = split.train_indices;
    result.test_indices = split.test_indices;

    const DgpOracleEstimator oracle(config);
    MbcOptions mbc;
    mbc.max_pairs = plan.mbc_max_pairs;
    mbc.seed = mix_seed(plan_fit_seed(plan.master_seed, replicate, "oracle"), hash_str("mbc"));
    result.train_report = compute_metric_report(oracle, train, plan.k_bins, mbc);
    result.test_report = compute_metric_report(oracle, test, plan.k_bins, mbc);
    result.ite_train = oracle.predict_ite_rows(train.covariates);
    result.ite_test = oracle.predict_ite_rows(test.covariates);
    result.ok = true;
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace

SimulationStudyReport run_simulation_study(const std::vector<SimPreset>& presets,
                                           const std::vector<PlanEstimator>& estimators,
                                           int replicates, std::size_t n, std::uint64_t seed,
                                           int k_bins, std::size_t scatter_cap) {
  SimulationStudyReport report;

  for (std::size_t pi = 0; pi < presets.size(); ++pi) {
    const SimPreset preset = presets[pi];
    const DgpConfig config = simulation_setting(preset, n, mix_seed(seed, pi));
    const SimulatedTrial trial = generate(config);

    ValidationPlan plan;
    plan.mode = PlanMode::InternalRandom;
    plan.datasets = {trial.data};
    plan.replicates = replicates;
    plan.k_bins = k_bins;
    plan.master_seed = mix_seed(seed, hash_str(sim_preset_name(preset)));

    std::vector<PlanEstimator> fitted;
    std::vector<PlanEstimator> oracle_cases;
    for (const auto& est : estimators) {
      (est.config.name == "oracle" ? oracle_cases : fitted).push_back(est);
    }
    plan.estimators = fitted;

    std::vector<RunResult> results = fitted.empty() ? std::vector<RunResult>{}
                                                    : run_internal(plan);
    for (const auto& oracle : oracle_cases) {
      const int reps = oracle.replicates > 0 ? oracle.replicates : replicates;
      for (int r = 0; r < reps; ++r) results.push_back(run_oracle_case(plan, config, r));
    }

    for (auto& run : results) {
      SimulationCase sim_case;
      sim_case.preset = preset;
      sim_case.estimator = run.estimator;
      if (run.ok) {
        const std::vector<double> true_train = select(trial.true_ite, run.train_indices);
        const std::vector<double> true_test = select(trial.true_ite, run.test_indices);
        sim_case.pehe_train = pehe(run.ite_train, true_train);
        sim_case.pehe_test = pehe(run.ite_test, true_test);
        sim_case.corr_train = pearson_correlation(run.ite_train, true_train);
        sim_case.corr_test = pearson_correlation(run.ite_test, true_test);
        sim_case.spearman_test = spearman_correlation(run.ite_test, true_test);
        const std::size_t step = std::max<std::size_t>(1, true_test.size() / scatter_cap);
        for (std::size_t i = 0; i < true_test.size(); i += step) {
          sim_case.scatter_test.emplace_back(true_test[i], run.ite_test[i]);
        }
      }
      sim_case.run = std::move(run);
      report.cases.push_back(std::move(sim_case));
    }
  }
  return report;
}

}  // namespace hte
