#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hte/estimators.hpp"
#include "hte/metrics.hpp"
#include "hte/trial_data.hpp"

namespace hte {

enum class PlanMode { InternalRandom, InternalGeographic, InternalCombined, External };

PlanMode plan_mode_from_string(const std::string& name);
std::string plan_mode_name(PlanMode mode);

struct PlanEstimator {
  EstimatorConfig config;
  int replicates = 0;  // 0 → plan default
};

// Declarative validation experiment over one or two datasets.
struct ValidationPlan {
  PlanMode mode = PlanMode::InternalRandom;
  std::vector<TrialDataset> datasets;  // 1 dataset, or 2 for Combined/External
  std::vector<PlanEstimator> estimators;
  double train_fraction = 2.0 / 3.0;
  int replicates = 1;
  int k_bins = 10;
  std::uint64_t master_seed = 0;
  std::set<std::string> train_regions;  // InternalGeographic only
  std::size_t mbc_max_pairs = 1000000;
  int curve_grid_size = 100;
};

struct RunResult {
  std::string estimator;
  int replicate = 0;
  std::string split_label;  // e.g. "split-0" or "A->B"
  bool ok = false;
  std::string error;  // failure isolation: errors recorded, never propagated
  MetricReport train_report;
  MetricReport test_report;
  std::vector<double> ite_train;
  std::vector<double> ite_test;
  std::vector<std::size_t> train_indices;  // rows of the plan dataset
  std::vector<std::size_t> test_indices;
  double seconds = 0.0;
};

// Seed derivation shared by every runner: stochastic components depend only
// on (master seed, replicate, estimator name), never on co-runners.
std::uint64_t plan_split_seed(std::uint64_t master_seed, int replicate);
std::uint64_t plan_fit_seed(std::uint64_t master_seed, int replicate,
                            const std::string& estimator_name);

// Full metric report for a fitted estimator on one partition. Metrics that a
// model's mechanism cannot support stay unset.
MetricReport compute_metric_report(const IteEstimator& estimator, const TrialDataset& data,
                                   int k_bins, const MbcOptions& mbc_options,
                                   int curve_grid_size = 100);

// Same report from externally supplied predictions. mu0/mu1 may be null
// (then mbc and the outcome-prediction diagnostics stay unset).
MetricReport compute_metric_report_from_predictions(const std::vector<double>& ite,
                                                    const std::vector<double>* mu0,
                                                    const std::vector<double>* mu1,
                                                    const TrialDataset& data, int k_bins,
                                                    const MbcOptions& mbc_options,
                                                    int curve_grid_size = 100);

std::vector<RunResult> run_internal(const ValidationPlan& plan);
std::vector<RunResult> run_external(const ValidationPlan& plan);
std::vector<RunResult> run_plan(const ValidationPlan& plan);

// Replicate-level benefit/harm stratum risk differences per estimator.
struct StratumDraws {
  std::vector<double> benefit_train;
  std::vector<double> harm_train;
  std::vector<double> benefit_test;
  std::vector<double> harm_test;
};

struct AggregateResult {
  std::map<std::string, StratumDraws> per_estimator;
};

AggregateResult aggregate(const std::vector<RunResult>& results);

// Quantiles by linear interpolation of the sorted sample; q in [0,1].
double quantile(std::vector<double> values, double q);

}  // namespace hte
