#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hte/matrix.hpp"

namespace hte {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Arm-level effect summary with 95% Wald intervals on three scales. Zero
// cells get a +0.5 continuity correction on the ratio scales (flagged).
struct EffectSummary {
  double risk_treated = 0.0;
  double risk_control = 0.0;
  double risk_difference = 0.0;
  double risk_ratio = 0.0;
  double odds_ratio = 0.0;
  Interval rd_ci, rr_ci, or_ci;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  std::size_t events_treated = 0;
  std::size_t events_control = 0;
  bool continuity_corrected = false;
};

EffectSummary effect_summary(const std::vector<int>& y, const std::vector<int>& t);

// Rank-matched treated-control pairs ordered by predicted ITE.
struct MatchedPair {
  std::size_t treated_index = 0;
  std::size_t control_index = 0;
  double predicted_benefit = 0.0;  // mean of the two ITEs
  int observed_benefit = 0;        // Y_treated - Y_control in {-1,0,1}
};

struct MatchedPairSet {
  std::vector<MatchedPair> pairs;
};

MatchedPairSet match_pairs_by_ite(const std::vector<double>& ite, const std::vector<int>& y,
                                  const std::vector<int>& t);

// Concordance over pair-of-pairs with differing observed benefit; ties in
// predicted benefit credit 0.5. O(m log m); equals exhaustive enumeration.
double c_for_benefit(const MatchedPairSet& pairs);

// Model-based concordance from arm probabilities: per patient the benefit
// B = Y(1) - Y(0) has P(B=-1) = (1-mu1)*mu0, P(B=1) = mu1*(1-mu0), potential
// outcomes independent. Averages P(B_i < B_j) + 0.5 P(B_i = B_j) over ordered
// pairs with tau_i < tau_j; pair population capped by seeded subsampling.
// order_scores overrides the tau ordering (must be a monotone relabeling).
struct MbcOptions {
  std::size_t max_pairs = 1000000;
  std::uint64_t seed = 0;
};

double model_based_c_for_benefit(const std::vector<double>& mu0, const std::vector<double>& mu1,
                                 const MbcOptions& options = {},
                                 const std::vector<double>* order_scores = nullptr);

// Quantile-binned observed-vs-predicted effect comparison. Bins missing an
// arm merge rightward. 1 = per-bin-perfect, 0 = no better than the constant
// global effect, negative = worse.
double calibration_pseudo_r2(const std::vector<double>& ite, const std::vector<int>& y,
                             const std::vector<int>& t, int k_bins);

struct EffectBin {
  double ite_lo = 0.0;
  double ite_hi = 0.0;
  double mean_predicted_ite = 0.0;
  std::size_t n = 0;
  EffectSummary observed;
};

struct BinnedEffects {
  std::vector<EffectBin> bins;
};

BinnedEffects subgroup_ate_by_ite_bins(const std::vector<double>& ite, const std::vector<int>& y,
                                       const std::vector<int>& t, int k_bins);

// Benefit (ITE < 0) and harm (ITE >= 0) strata summaries; a stratum missing
// either arm is reported unavailable rather than erroring.
struct StratumSummary {
  bool available = false;
  std::size_t n = 0;
  EffectSummary summary;
};

struct BenefitHarm {
  StratumSummary benefit;
  StratumSummary harm;
};

BenefitHarm benefit_harm_strata(const std::vector<double>& ite, const std::vector<int>& y,
                                const std::vector<int>& t);

// Per-arm univariate logistic fits of outcome on predicted ITE, sampled on a
// shared grid with 95% Wald bands.
struct CurvePoint {
  double ite = 0.0;
  double probability = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct OutcomeIteCurves {
  std::vector<CurvePoint> treated;
  std::vector<CurvePoint> control;
};

OutcomeIteCurves outcome_ite_curves(const std::vector<double>& ite, const std::vector<int>& y,
                                    const std::vector<int>& t, int grid_size);

// Outcome-prediction diagnostics: tie-corrected rank AUC plus an
// equal-count calibration table (adjacent equal-prediction bins merged).
struct CalibrationPoint {
  double mean_predicted = 0.0;
  double observed_rate = 0.0;
  std::size_t n = 0;
};

struct PredictionDiagnostics {
  double auc = 0.0;
  std::vector<CalibrationPoint> calibration;
};

PredictionDiagnostics outcome_prediction_diagnostics(const std::vector<double>& probs,
                                                     const std::vector<int>& y, int bins = 10);

// ROC curve points (FPR, TPR) at every distinct threshold, for plot files.
std::vector<std::pair<double, double>> roc_points(const std::vector<double>& probs,
                                                  const std::vector<int>& y);

// Root-mean-squared error between predicted and true ITEs (simulation only).
double pehe(const std::vector<double>& ite_hat, const std::vector<double>& ite_true);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);
double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

// Everything the validation harness reports for one (model, partition) pair.
// Unavailable metrics stay unset, mirroring dash-annotated result tables.
struct MetricReport {
  std::optional<double> c_for_benefit;
  std::optional<double> mbc;
  std::optional<double> pseudo_r2;
  BinnedEffects bins;
  BenefitHarm strata;
  std::optional<double> auc_treated;
  std::optional<double> auc_control;
  std::vector<CalibrationPoint> calibration_treated;
  std::vector<CalibrationPoint> calibration_control;
  OutcomeIteCurves curves;
  std::vector<std::pair<double, double>> roc_treated;
  std::vector<std::pair<double, double>> roc_control;
};

}  // namespace hte
