#include "hte/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hte/error.hpp"
#include "hte/rng.hpp"
#include "hte/threading.hpp"

namespace hte {

PlanMode plan_mode_from_string(const std::string& name) {
  if (name == "internal_random") return PlanMode::InternalRandom;
  if (name == "internal_geographic") return PlanMode::InternalGeographic;
  if (name == "internal_combined") return PlanMode::InternalCombined;
  if (name == "external") return PlanMode::External;
  raise(ErrorCode::ConfigInvalid, "unknown mode '" + name + "'");
}

std::string plan_mode_name(PlanMode mode) {
  switch (mode) {
    case PlanMode::InternalRandom: return "internal_random";
    case PlanMode::InternalGeographic: return "internal_geographic";
    case PlanMode::InternalCombined: return "internal_combined";
    case PlanMode::External: return "external";
  }
  return "?";
}

MetricReport compute_metric_report_from_predictions(const std::vector<double>& ite,
                                                    const std::vector<double>* mu0,
                                                    const std::vector<double>* mu1,
                                                    const TrialDataset& data, int k_bins,
                                                    const MbcOptions& mbc_options,
                                                    int curve_grid_size) {
  MetricReport report;

  const MatchedPairSet pairs = match_pairs_by_ite(ite, data.outcome, data.treatment);
  if (pairs.pairs.size() >= 2) report.c_for_benefit = c_for_benefit(pairs);

  try {
    report.pseudo_r2 = calibration_pseudo_r2(ite, data.outcome, data.treatment, k_bins);
    report.bins = subgroup_ate_by_ite_bins(ite, data.outcome, data.treatment, k_bins);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateBins) throw;
  }

  report.strata = benefit_harm_strata(ite, data.outcome, data.treatment);

  try {
    report.curves = outcome_ite_curves(ite, data.outcome, data.treatment, curve_grid_size);
  } catch (const Error&) {
    // degenerate ITE spread; plots stay empty
  }

  if (mu0 && mu1) {
    report.mbc = model_based_c_for_benefit(*mu0, *mu1, mbc_options);

    // Outcome-prediction diagnostics per arm: the arm's own outcome model
    // scored on the arm's observed outcomes.
    std::vector<double> probs_treated, probs_control;
    std::vector<int> y_treated, y_control;
    for (std::size_t i = 0; i < data.n(); ++i) {
      if (data.treatment[i]) {
        probs_treated.push_back((*mu1)[i]);
        y_treated.push_back(data.outcome[i]);
      } else {
        probs_control.push_back((*mu0)[i]);
        y_control.push_back(data.outcome[i]);
      }
    }
    try {
      const PredictionDiagnostics diag = outcome_prediction_diagnostics(probs_treated, y_treated);
      report.auc_treated = diag.auc;
      report.calibration_treated = diag.calibration;
      report.roc_treated = roc_points(probs_treated, y_treated);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingleClass) throw;
    }
    try {
      const PredictionDiagnostics diag = outcome_prediction_diagnostics(probs_control, y_control);
      report.auc_control = diag.auc;
      report.calibration_control = diag.calibration;
      report.roc_control = roc_points(probs_control, y_control);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingleClass) throw;
    }
  }
  return report;
}

MetricReport compute_metric_report(const IteEstimator& estimator, const TrialDataset& data,
                                   int k_bins, const MbcOptions& mbc_options,
                                   int curve_grid_size) {
  const std::vector<double> ite = estimator.predict_ite_rows(data.covariates);
  if (!estimator.has_arm_probs()) {
    return compute_metric_report_from_predictions(ite, nullptr, nullptr, data, k_bins,
                                                  mbc_options, curve_grid_size);
  }
  std::vector<double> mu0(data.n()), mu1(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto [m0, m1] = estimator.arm_probs(data.covariates.row(i));
    mu0[i] = m0;
    mu1[i] = m1;
  }
  return compute_metric_report_from_predictions(ite, &mu0, &mu1, data, k_bins, mbc_options,
                                                curve_grid_size);
}

std::uint64_t plan_split_seed(std::uint64_t master_seed, int replicate) {
  return mix_seed(mix_seed(master_seed, static_cast<std::uint64_t>(replicate)),
                  hash_str("split"));
}

std::uint64_t plan_fit_seed(std::uint64_t master_seed, int replicate,
                            const std::string& estimator_name) {
  return mix_seed(mix_seed(master_seed, static_cast<std::uint64_t>(replicate)),
                  hash_str(estimator_name));
}

namespace {

struct Task {
  std::size_t estimator_index;
  int replicate;
};

RunResult run_one(const ValidationPlan& plan, const TrialDataset& full,
                  const PlanEstimator& est, int replicate) {
  RunResult result;
  result.estimator = est.config.name;
  result.replicate = replicate;
  result.split_label = "split-" + std::to_string(replicate);

  const auto started = std::chrono::steady_clock::now();
  try {
    SplitAssignment split;
    switch (plan.mode) {
      case PlanMode::InternalGeographic:
        split = geographic_split(full, plan.train_regions);
        break;
      case PlanMode::InternalRandom:
      case PlanMode::InternalCombined:
        // Same split for every estimator in a replicate; derived only from
        // (master seed, replicate) so co-runners cannot perturb it.
        split = random_split(full, plan.train_fraction,
                             plan_split_seed(plan.master_seed, replicate));
        break;
      case PlanMode::External:
        raise(ErrorCode::InvalidArgument, "external plans do not use run_one");
    }

    const TrialDataset train = full.subset(split.train_indices);
    const TrialDataset test = full.subset(split.test_indices);
    result.train_indices = split.train_indices;
    result.test_indices = split.test_indices;

    const std::uint64_t fit_seed =
        plan_fit_seed(plan.master_seed, replicate, est.config.name);
    const auto model = fit_named_estimator(est.config, train, fit_seed);

    MbcOptions mbc;
    mbc.max_pairs = plan.mbc_max_pairs;
    mbc.seed = mix_seed(fit_seed, hash_str("mbc"));
    result.train_report =
        compute_metric_report(*model, train, plan.k_bins, mbc, plan.curve_grid_size);
    mbc.seed = mix_seed(fit_seed, hash_str("mbc_test"));
    result.test_report =
        compute_metric_report(*model, test, plan.k_bins, mbc, plan.curve_grid_size);
    result.ite_train = model->predict_ite_rows(train.covariates);
    result.ite_test = model->predict_ite_rows(test.covariates);
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

std::vector<RunResult> run_internal(const ValidationPlan& plan) {
  if (plan.mode == PlanMode::External) {
    raise(ErrorCode::InvalidArgument, "plan mode is external");
  }
  if (plan.datasets.empty()) raise(ErrorCode::InvalidArgument, "plan has no dataset");
  if (plan.estimators.empty()) raise(ErrorCode::InvalidArgument, "plan has no estimators");

  TrialDataset full;
  if (plan.mode == PlanMode::InternalCombined) {
    full = plan.datasets.size() > 1 ? merge(plan.datasets) : plan.datasets.front();
  } else {
    full = plan.datasets.front();
  }

  std::vector<Task> tasks;
  for (std::size_t e = 0; e < plan.estimators.size(); ++e) {
    int replicates = plan.estimators[e].replicates > 0 ? plan.estimators[e].replicates
                                                       : plan.replicates;
    if (plan.mode == PlanMode::InternalGeographic) replicates = 1;  // deterministic split
    for (int r = 0; r < replicates; ++r) tasks.push_back({e, r});
  }

  std::vector<RunResult> results(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t k) {
    results[k] = run_one(plan, full, plan.estimators[tasks[k].estimator_index],
                         tasks[k].replicate);
  });
  return results;
}

std::vector<RunResult> run_external(const ValidationPlan& plan) {
  if (plan.datasets.size() != 2) {
    raise(ErrorCode::InvalidArgument, "external validation needs exactly 2 datasets");
  }
  const TrialDataset& a = plan.datasets[0];
  const TrialDataset& b = plan.datasets[1];
  if (a.feature_names != b.feature_names) {
    raise(ErrorCode::SchemaMismatch, "datasets are not harmonized");
  }

  struct Direction {
    const TrialDataset* train;
    const TrialDataset* test;
    std::string label;
  };
  const std::vector<Direction> directions = {
      {&a, &b, a.source_label + "->" + b.source_label},
      {&b, &a, b.source_label + "->" + a.source_label},
  };

  std::vector<Task> tasks;
  for (std::size_t e = 0; e < plan.estimators.size(); ++e) {
    for (int d = 0; d < 2; ++d) tasks.push_back({e, d});
  }

  std::vector<RunResult> results(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t k) {
    const auto& est = plan.estimators[tasks[k].estimator_index];
    const auto& dir = directions[static_cast<std::size_t>(tasks[k].replicate)];

    RunResult result;
    result.estimator = est.config.name;
    result.replicate = tasks[k].replicate;
    result.split_label = dir.label;
    const auto started = std::chrono::steady_clock::now();
    try {
      const std::uint64_t fit_seed =
          plan_fit_seed(plan.master_seed, tasks[k].replicate, est.config.name);
      const auto model = fit_named_estimator(est.config, *dir.train, fit_seed);

      MbcOptions mbc;
      mbc.max_pairs = plan.mbc_max_pairs;
      mbc.seed = mix_seed(fit_seed, hash_str("mbc"));
      result.train_report =
          compute_metric_report(*model, *dir.train, plan.k_bins, mbc, plan.curve_grid_size);
      mbc.seed = mix_seed(fit_seed, hash_str("mbc_test"));
      result.test_report =
          compute_metric_report(*model, *dir.test, plan.k_bins, mbc, plan.curve_grid_size);
      result.ite_train = model->predict_ite_rows(dir.train->covariates);
      result.ite_test = model->predict_ite_rows(dir.test->covariates);
      result.ok = true;
    } catch (const std::exception& e) {
      result.ok = false;
      result.error = e.what();
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    results[k] = result;
  });
  return results;
}

std::vector<RunResult> run_plan(const ValidationPlan& plan) {
  return plan.mode == PlanMode::External ? run_external(plan) : run_internal(plan);
}

AggregateResult aggregate(const std::vector<RunResult>& results) {
  AggregateResult out;
  for (const auto& result : results) {
    if (!result.ok) continue;
    auto& draws = out.per_estimator[result.estimator];
    if (result.train_report.strata.benefit.available) {
      draws.benefit_train.push_back(result.train_report.strata.benefit.summary.risk_difference);
    }
    if (result.train_report.strata.harm.available) {
      draws.harm_train.push_back(result.train_report.strata.harm.summary.risk_difference);
    }
    if (result.test_report.strata.benefit.available) {
      draws.benefit_test.push_back(result.test_report.strata.benefit.summary.risk_difference);
    }
    if (result.test_report.strata.harm.available) {
      draws.harm_test.push_back(result.test_report.strata.harm.summary.risk_difference);
    }
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) raise(ErrorCode::InvalidArgument, "quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace hte
