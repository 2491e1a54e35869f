#include "hte/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hte/base_learners.hpp"
#include "hte/error.hpp"
#include "hte/rng.hpp"

namespace hte {

void DgpConfig::validate() const {
  if (n < 4) raise(ErrorCode::InvalidArgument, "n must be >= 4");
  if (beta.size() != p() || gamma.size() != p()) {
    raise(ErrorCode::LengthMismatch, "beta/gamma length must equal p");
  }
  if (!(treat_prob > 0.0 && treat_prob < 1.0)) {
    raise(ErrorCode::InvalidArgument, "treatment probability outside (0,1)");
  }
  if (visible_features) {
    for (std::size_t j : *visible_features) {
      if (j >= p()) raise(ErrorCode::InvalidArgument, "visible feature index out of range");
    }
  }
}

SimulatedTrial generate(const DgpConfig& config) {
  config.validate();
  Rng rng(config.seed);

  const std::size_t n = config.n, p = config.p();
  SimulatedTrial trial;
  trial.full_covariates = Matrix(n, p);
  trial.full_feature_names.reserve(p);
  for (std::size_t j = 0; j < p; ++j) {
    trial.full_feature_names.push_back(
        (j < config.p_continuous ? "x" : "d") + std::to_string(j + 1));
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      trial.full_covariates(i, j) = (j < config.p_continuous)
                                        ? rng.normal()
                                        : static_cast<double>(rng.bernoulli(0.5));
    }
  }

  trial.true_ite.resize(n);
  trial.data.treatment.resize(n);
  trial.data.outcome.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = config.beta0;
    double delta = config.gamma0;
    for (std::size_t j = 0; j < p; ++j) {
      eta += config.beta[j] * trial.full_covariates(i, j);
      delta += config.gamma[j] * trial.full_covariates(i, j);
    }
    const int treatment = rng.bernoulli(config.treat_prob) ? 1 : 0;
    const double event_prob = expit(eta + (treatment ? delta : 0.0));
    trial.data.treatment[i] = treatment;
    trial.data.outcome[i] = rng.bernoulli(event_prob) ? 1 : 0;
    trial.true_ite[i] = expit(eta + delta) - expit(eta);
  }

  if (config.visible_features) {
    trial.data.covariates = trial.full_covariates.select_cols(*config.visible_features);
    for (std::size_t j : *config.visible_features) {
      trial.data.feature_names.push_back(trial.full_feature_names[j]);
    }
  } else {
    trial.data.covariates = trial.full_covariates;
    trial.data.feature_names = trial.full_feature_names;
  }
  trial.data.source_label = "simulated";
  trial.data.row_source.assign(n, trial.data.source_label);
  trial.data.validate();
  return trial;
}

SimPreset sim_preset_from_string(const std::string& name) {
  if (name == "I" || name == "1" || name == "i") return SimPreset::I;
  if (name == "II" || name == "2" || name == "ii") return SimPreset::II;
  if (name == "III" || name == "3" || name == "iii") return SimPreset::III;
  raise(ErrorCode::ConfigInvalid, "unknown simulation setting '" + name + "'");
}

std::string sim_preset_name(SimPreset preset) {
  switch (preset) {
    case SimPreset::I: return "I";
    case SimPreset::II: return "II";
    case SimPreset::III: return "III";
  }
  return "?";
}

DgpConfig simulation_setting(SimPreset preset, std::size_t n, std::uint64_t seed) {
  if (n < 100) raise(ErrorCode::InvalidArgument, "n must be >= 100");

  DgpConfig config;
  config.n = n;
  config.seed = seed;
  config.beta0 = -0.5;
  config.gamma0 = -0.3;
  config.treat_prob = 0.5;

  switch (preset) {
    case SimPreset::I:
    case SimPreset::II:
      config.p_continuous = 20;
      config.p_discrete = 0;
      break;
    case SimPreset::III:
      config.p_continuous = 10;
      config.p_discrete = 10;
      break;
  }

  const std::size_t p = config.p();
  const std::vector<double> base_beta = {0.5, -0.5, 0.4, -0.4, 0.3, -0.3, 0.2, -0.2, 0.1, -0.1};
  const std::vector<double> base_gamma = {0.6, -0.6, 0.4, -0.4};
  config.beta.assign(p, 0.0);
  config.gamma.assign(p, 0.0);
  for (std::size_t j = 0; j < p && j < base_beta.size(); ++j) config.beta[j] = base_beta[j];
  for (std::size_t j = 0; j < p && j < base_gamma.size(); ++j) config.gamma[j] = base_gamma[j];

  if (preset == SimPreset::II) {
    // The 6 features with the smallest |beta_j| + |gamma_j|; ties resolve to
    // the smallest index, so the all-zero tail wins.
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(config.beta[a]) + std::abs(config.gamma[a]) <
             std::abs(config.beta[b]) + std::abs(config.gamma[b]);
    });
    std::vector<std::size_t> visible(order.begin(), order.begin() + 6);
    std::sort(visible.begin(), visible.end());
    config.visible_features = visible;
  }
  return config;
}

}  // namespace hte
