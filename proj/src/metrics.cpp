#include "hte/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hte/base_learners.hpp"
#include "hte/error.hpp"
#include "hte/linalg.hpp"
#include "hte/rng.hpp"

namespace hte {

namespace {

constexpr double kZ95 = 1.959963984540054;  // Phi^-1(0.975)

std::vector<std::size_t> argsort(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  return order;
}

}  // namespace

EffectSummary effect_summary(const std::vector<int>& y, const std::vector<int>& t) {
  if (y.size() != t.size()) raise(ErrorCode::LengthMismatch, "y/t length mismatch");
  EffectSummary s;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (t[i]) {
      ++s.n_treated;
      s.events_treated += static_cast<std::size_t>(y[i]);
    } else {
      ++s.n_control;
      s.events_control += static_cast<std::size_t>(y[i]);
    }
  }
  if (s.n_treated == 0 || s.n_control == 0) {
    raise(ErrorCode::ArmEmpty, "effect summary needs both arms");
  }

  const double n1 = static_cast<double>(s.n_treated), n0 = static_cast<double>(s.n_control);
  const double a = static_cast<double>(s.events_treated);
  const double c = static_cast<double>(s.events_control);
  s.risk_treated = a / n1;
  s.risk_control = c / n0;
  s.risk_difference = s.risk_treated - s.risk_control;

  const double rd_se = std::sqrt(s.risk_treated * (1.0 - s.risk_treated) / n1 +
                                 s.risk_control * (1.0 - s.risk_control) / n0);
  s.rd_ci = {s.risk_difference - kZ95 * rd_se, s.risk_difference + kZ95 * rd_se};

  // Ratio scales: +0.5 on every cell when any cell is zero, so the interval
  // stays finite and contains the (corrected) point estimate.
  const bool zero_cell = a == 0.0 || c == 0.0 || a == n1 || c == n0;
  s.continuity_corrected = zero_cell;
  const double ca = zero_cell ? a + 0.5 : a;
  const double cc = zero_cell ? c + 0.5 : c;
  const double cn1 = zero_cell ? n1 + 1.0 : n1;
  const double cn0 = zero_cell ? n0 + 1.0 : n0;

  s.risk_ratio = (ca / cn1) / (cc / cn0);
  const double log_rr_se = std::sqrt(1.0 / ca - 1.0 / cn1 + 1.0 / cc - 1.0 / cn0);
  s.rr_ci = {std::exp(std::log(s.risk_ratio) - kZ95 * log_rr_se),
             std::exp(std::log(s.risk_ratio) + kZ95 * log_rr_se)};

  s.odds_ratio = (ca / (cn1 - ca)) / (cc / (cn0 - cc));
  const double log_or_se =
      std::sqrt(1.0 / ca + 1.0 / (cn1 - ca) + 1.0 / cc + 1.0 / (cn0 - cc));
  s.or_ci = {std::exp(std::log(s.odds_ratio) - kZ95 * log_or_se),
             std::exp(std::log(s.odds_ratio) + kZ95 * log_or_se)};
  return s;
}

MatchedPairSet match_pairs_by_ite(const std::vector<double>& ite, const std::vector<int>& y,
                                  const std::vector<int>& t) {
  if (ite.size() != y.size() || y.size() != t.size()) {
    raise(ErrorCode::LengthMismatch, "ite/y/t length mismatch");
  }
  std::vector<std::size_t> treated, control;
  std::vector<double> ite_treated, ite_control;
  for (std::size_t i = 0; i < ite.size(); ++i) {
    (t[i] ? treated : control).push_back(i);
  }
  if (treated.empty() || control.empty()) raise(ErrorCode::ArmEmpty, "both arms required");

  auto by_ite = [&](std::vector<std::size_t>& idx) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (ite[a] != ite[b]) return ite[a] < ite[b];
      return a < b;
    });
  };
  by_ite(treated);
  by_ite(control);

  MatchedPairSet set;
  const std::size_t m = std::min(treated.size(), control.size());
  set.pairs.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    MatchedPair pair;
    pair.treated_index = treated[k];
    pair.control_index = control[k];
    pair.predicted_benefit = 0.5 * (ite[treated[k]] + ite[control[k]]);
    pair.observed_benefit = y[treated[k]] - y[control[k]];
    set.pairs.push_back(pair);
  }
  return set;
}

namespace {

// Sum over (a in lo, b in hi) of [lo_a < hi_b] + 0.5 [lo_a == hi_b];
// both inputs sorted ascending.
double cross_concordance(const std::vector<double>& lo, const std::vector<double>& hi) {
  double weight = 0.0;
  std::size_t p_less = 0, p_leq = 0;
  for (double v : hi) {
    while (p_less < lo.size() && lo[p_less] < v) ++p_less;
    while (p_leq < lo.size() && lo[p_leq] <= v) ++p_leq;
    weight += static_cast<double>(p_less) + 0.5 * static_cast<double>(p_leq - p_less);
  }
  return weight;
}

}  // namespace

double c_for_benefit(const MatchedPairSet& set) {
  if (set.pairs.size() < 2) raise(ErrorCode::TooFewPairs, "need at least 2 matched pairs");

  // Group predicted benefits by observed benefit level.
  std::vector<double> group[3];  // B = -1, 0, 1
  for (const auto& pair : set.pairs) {
    group[pair.observed_benefit + 1].push_back(pair.predicted_benefit);
  }
  for (auto& g : group) std::sort(g.begin(), g.end());

  double concordant = 0.0, comparable = 0.0;
  for (int lo = 0; lo < 3; ++lo) {
    for (int hi = lo + 1; hi < 3; ++hi) {
      comparable += static_cast<double>(group[lo].size()) * static_cast<double>(group[hi].size());
      concordant += cross_concordance(group[lo], group[hi]);
    }
  }
  if (comparable == 0.0) return 0.5;
  return concordant / comparable;
}

double model_based_c_for_benefit(const std::vector<double>& mu0, const std::vector<double>& mu1,
                                 const MbcOptions& options,
                                 const std::vector<double>* order_scores) {
  if (mu0.size() != mu1.size()) raise(ErrorCode::LengthMismatch, "mu0/mu1 length mismatch");
  const std::size_t n = mu0.size();
  if (n < 2) raise(ErrorCode::TooFewPairs, "need at least 2 patients");

  std::vector<double> tau(n);
  for (std::size_t i = 0; i < n; ++i) tau[i] = mu1[i] - mu0[i];
  const std::vector<double>& scores = order_scores ? *order_scores : tau;
  if (scores.size() != n) raise(ErrorCode::LengthMismatch, "order_scores length mismatch");

  // Benefit distribution per patient, independence across potential outcomes.
  std::vector<double> p_neg(n), p_zero(n), p_pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    p_neg[i] = (1.0 - mu1[i]) * mu0[i];
    p_pos[i] = mu1[i] * (1.0 - mu0[i]);
    p_zero[i] = 1.0 - p_neg[i] - p_pos[i];
  }

  auto pair_weight = [&](std::size_t i, std::size_t j) {
    // P(B_i < B_j) + 0.5 P(B_i = B_j); B_j larger means patient j benefits less.
    const double less = p_neg[i] * (p_zero[j] + p_pos[j]) + p_zero[i] * p_pos[j];
    const double equal = p_neg[i] * p_neg[j] + p_zero[i] * p_zero[j] + p_pos[i] * p_pos[j];
    return less + 0.5 * equal;
  };

  const std::vector<std::size_t> order = argsort(scores);

  // Count ordered pairs with strictly increasing score.
  double total_pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  std::size_t block = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    if (k == n || scores[order[k]] != scores[order[k - 1]]) {
      total_pairs -= static_cast<double>(block) * static_cast<double>(block - 1) / 2.0;
      block = 1;
    } else {
      ++block;
    }
  }
  if (total_pairs <= 0.0) return 0.5;

  if (total_pairs <= static_cast<double>(options.max_pairs)) {
    double sum = 0.0, count = 0.0;
    for (std::size_t b = 1; b < n; ++b) {
      for (std::size_t a = 0; a < b; ++a) {
        if (scores[order[a]] == scores[order[b]]) continue;
        sum += pair_weight(order[a], order[b]);
        count += 1.0;
      }
    }
    return sum / count;
  }

  // Seeded pair subsample for large n.
  Rng rng(options.seed);
  double sum = 0.0;
  std::size_t accepted = 0;
  std::size_t attempts = 0;
  const std::size_t max_attempts = options.max_pairs * 50;
  while (accepted < options.max_pairs && attempts < max_attempts) {
    ++attempts;
    const std::size_t u = rng.uniform_below(n);
    const std::size_t v = rng.uniform_below(n);
    if (scores[u] == scores[v]) continue;
    const std::size_t i = scores[u] < scores[v] ? u : v;
    const std::size_t j = scores[u] < scores[v] ? v : u;
    sum += pair_weight(i, j);
    ++accepted;
  }
  if (accepted == 0) return 0.5;
  return sum / static_cast<double>(accepted);
}

namespace {

struct IteBinIndices {
  std::vector<std::vector<std::size_t>> bins;  // each has both arms
};

bool has_both_arms(const std::vector<std::size_t>& idx, const std::vector<int>& t) {
  bool treated = false, control = false;
  for (std::size_t i : idx) {
    (t[i] ? treated : control) = true;
    if (treated && control) return true;
  }
  return false;
}

// Quantile bins over predicted ITE; bins lacking an arm merge rightward
// (last bin merges left). Fewer than 2 surviving bins is DegenerateBins.
IteBinIndices ite_quantile_bins(const std::vector<double>& ite, const std::vector<int>& t,
                                int k_bins) {
  if (k_bins < 2) raise(ErrorCode::InvalidArgument, "k_bins must be >= 2");
  const std::size_t n = ite.size();
  const std::vector<std::size_t> order = argsort(ite);

  std::vector<std::vector<std::size_t>> bins;
  for (int b = 0; b < k_bins; ++b) {
    const std::size_t lo = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(k_bins);
    const std::size_t hi =
        n * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(k_bins);
    if (lo == hi) continue;
    bins.emplace_back(order.begin() + static_cast<long>(lo), order.begin() + static_cast<long>(hi));
  }

  for (std::size_t b = 0; b < bins.size();) {
    if (has_both_arms(bins[b], t)) {
      ++b;
      continue;
    }
    if (b + 1 < bins.size()) {
      bins[b + 1].insert(bins[b + 1].begin(), bins[b].begin(), bins[b].end());
      bins.erase(bins.begin() + static_cast<long>(b));
    } else if (b > 0) {
      bins[b - 1].insert(bins[b - 1].end(), bins[b].begin(), bins[b].end());
      bins.erase(bins.begin() + static_cast<long>(b));
      b = 0;  // the enlarged predecessor may still lack an arm
    } else {
      raise(ErrorCode::DegenerateBins, "no bin contains both arms");
    }
  }
  if (bins.size() < 2) raise(ErrorCode::DegenerateBins, "cannot form 2 valid bins");
  return {std::move(bins)};
}

}  // namespace

double calibration_pseudo_r2(const std::vector<double>& ite, const std::vector<int>& y,
                             const std::vector<int>& t, int k_bins) {
  if (ite.size() != y.size() || y.size() != t.size()) {
    raise(ErrorCode::LengthMismatch, "ite/y/t length mismatch");
  }
  const IteBinIndices binning = ite_quantile_bins(ite, t, k_bins);
  const EffectSummary global = effect_summary(y, t);

  double numerator = 0.0, denominator = 0.0;
  for (const auto& bin : binning.bins) {
    const EffectSummary observed = effect_summary(select(y, bin), select(t, bin));
    double mean_ite = 0.0;
    for (std::size_t i : bin) mean_ite += ite[i];
    mean_ite /= static_cast<double>(bin.size());
    const double nk = static_cast<double>(bin.size());
    const double err = observed.risk_difference - mean_ite;
    const double base = observed.risk_difference - global.risk_difference;
    numerator += nk * err * err;
    denominator += nk * base * base;
  }
  if (denominator == 0.0) {
    return numerator == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  }
  return 1.0 - numerator / denominator;
}

BinnedEffects subgroup_ate_by_ite_bins(const std::vector<double>& ite, const std::vector<int>& y,
                                       const std::vector<int>& t, int k_bins) {
  if (ite.size() != y.size() || y.size() != t.size()) {
    raise(ErrorCode::LengthMismatch, "ite/y/t length mismatch");
  }
  const IteBinIndices binning = ite_quantile_bins(ite, t, k_bins);

  BinnedEffects out;
  for (const auto& bin : binning.bins) {
    EffectBin effect_bin;
    effect_bin.n = bin.size();
    effect_bin.observed = effect_summary(select(y, bin), select(t, bin));
    double lo = ite[bin.front()], hi = ite[bin.front()], sum = 0.0;
    for (std::size_t i : bin) {
      lo = std::min(lo, ite[i]);
      hi = std::max(hi, ite[i]);
      sum += ite[i];
    }
    effect_bin.ite_lo = lo;
    effect_bin.ite_hi = hi;
    effect_bin.mean_predicted_ite = sum / static_cast<double>(bin.size());
    out.bins.push_back(effect_bin);
  }
  return out;
}

BenefitHarm benefit_harm_strata(const std::vector<double>& ite, const std::vector<int>& y,
                                const std::vector<int>& t) {
  if (ite.size() != y.size() || y.size() != t.size()) {
    raise(ErrorCode::LengthMismatch, "ite/y/t length mismatch");
  }
  std::vector<std::size_t> benefit, harm;
  for (std::size_t i = 0; i < ite.size(); ++i) {
    (ite[i] < 0.0 ? benefit : harm).push_back(i);  // ties go to harm
  }

  BenefitHarm out;
  auto fill = [&](const std::vector<std::size_t>& idx, StratumSummary& stratum) {
    stratum.n = idx.size();
    if (idx.empty() || !has_both_arms(idx, t)) return;
    stratum.summary = effect_summary(select(y, idx), select(t, idx));
    stratum.available = true;
  };
  fill(benefit, out.benefit);
  fill(harm, out.harm);
  return out;
}

OutcomeIteCurves outcome_ite_curves(const std::vector<double>& ite, const std::vector<int>& y,
                                    const std::vector<int>& t, int grid_size) {
  if (ite.size() != y.size() || y.size() != t.size()) {
    raise(ErrorCode::LengthMismatch, "ite/y/t length mismatch");
  }
  if (grid_size < 2) raise(ErrorCode::InvalidArgument, "grid_size must be >= 2");

  const auto [min_it, max_it] = std::minmax_element(ite.begin(), ite.end());
  const double lo = *min_it, hi = *max_it;

  auto fit_arm = [&](int arm) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == arm) rows.push_back(i);
    }
    if (rows.empty()) raise(ErrorCode::ArmEmpty, "both arms required");

    Matrix design(rows.size(), 1);
    std::vector<int> target;
    target.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      design(k, 0) = ite[rows[k]];
      target.push_back(y[rows[k]]);
    }
    const LogisticModel model = fit_logistic(design, target, 1e-8);
    const std::vector<double> info = logistic_information(model, design, 1e-8);
    std::vector<double> cov;
    if (!spd_inverse(info, 2, cov)) {
      raise(ErrorCode::SingularDesign, "curve information matrix singular");
    }

    std::vector<CurvePoint> points;
    points.reserve(static_cast<std::size_t>(grid_size));
    for (int gidx = 0; gidx < grid_size; ++gidx) {
      const double g = lo + (hi - lo) * static_cast<double>(gidx) / (grid_size - 1);
      const double eta = model.coefficients[0] + model.coefficients[1] * g;
      const double var = cov[0] + 2.0 * g * cov[1] + g * g * cov[3];
      const double half = kZ95 * std::sqrt(std::max(var, 0.0));
      points.push_back({g, expit(eta), expit(eta - half), expit(eta + half)});
    }
    return points;
  };

  OutcomeIteCurves curves;
  curves.control = fit_arm(0);
  curves.treated = fit_arm(1);
  return curves;
}

PredictionDiagnostics outcome_prediction_diagnostics(const std::vector<double>& probs,
                                                     const std::vector<int>& y, int bins) {
  if (probs.size() != y.size()) raise(ErrorCode::LengthMismatch, "probs/y length mismatch");
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) raise(ErrorCode::InvalidArgument, "probability outside [0,1]");
  }
  std::size_t n_pos = 0;
  for (int v : y) n_pos += static_cast<std::size_t>(v);
  const std::size_t n = y.size();
  if (n_pos == 0 || n_pos == n) raise(ErrorCode::SingleClass, "AUC undefined for single class");

  // Mann-Whitney AUC with average ranks over ties.
  const std::vector<std::size_t> order = argsort(probs);
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && probs[order[j + 1]] == probs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double rank_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (y[k]) rank_sum += rank[k];
  }
  const double n1 = static_cast<double>(n_pos), n0 = static_cast<double>(n - n_pos);

  PredictionDiagnostics out;
  out.auc = (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);

  // Equal-count calibration bins; adjacent bins sharing a boundary value merge.
  const std::size_t k_bins = std::min<std::size_t>(static_cast<std::size_t>(bins), n);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t b = 0; b < k_bins; ++b) {
    const std::size_t lo = n * b / k_bins;
    const std::size_t hi = n * (b + 1) / k_bins;
    if (lo == hi) continue;
    if (!ranges.empty() && probs[order[lo]] == probs[order[ranges.back().second - 1]]) {
      ranges.back().second = hi;
    } else {
      ranges.emplace_back(lo, hi);
    }
  }
  for (const auto& [lo, hi] : ranges) {
    CalibrationPoint point;
    point.n = hi - lo;
    double pred = 0.0, obs = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      pred += probs[order[k]];
      obs += y[order[k]];
    }
    point.mean_predicted = pred / static_cast<double>(point.n);
    point.observed_rate = obs / static_cast<double>(point.n);
    out.calibration.push_back(point);
  }
  return out;
}

std::vector<std::pair<double, double>> roc_points(const std::vector<double>& probs,
                                                  const std::vector<int>& y) {
  if (probs.size() != y.size()) raise(ErrorCode::LengthMismatch, "probs/y length mismatch");
  std::size_t n_pos = 0;
  for (int v : y) n_pos += static_cast<std::size_t>(v);
  const std::size_t n_neg = y.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) raise(ErrorCode::SingleClass, "ROC undefined for single class");

  std::vector<std::size_t> order = argsort(probs);
  std::reverse(order.begin(), order.end());  // descending score

  std::vector<std::pair<double, double>> points{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = probs[order[i]];
    while (i < order.size() && probs[order[i]] == threshold) {
      (y[order[i]] ? tp : fp) += 1;
      ++i;
    }
    points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                        static_cast<double>(tp) / static_cast<double>(n_pos));
  }
  return points;
}

double pehe(const std::vector<double>& ite_hat, const std::vector<double>& ite_true) {
  if (ite_hat.size() != ite_true.size()) {
    raise(ErrorCode::LengthMismatch, "ite vectors differ in length");
  }
  if (ite_hat.empty()) raise(ErrorCode::InvalidArgument, "empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < ite_hat.size(); ++i) {
    const double d = ite_hat[i] - ite_true[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(ite_hat.size()));
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) raise(ErrorCode::LengthMismatch, "length mismatch");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;  // constant input: no association
  return sab / std::sqrt(saa * sbb);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::vector<std::size_t> order = argsort(values);
  std::vector<double> rank(values.size());
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j + 1 < values.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson_correlation(average_ranks(a), average_ranks(b));
}

}  // namespace hte
