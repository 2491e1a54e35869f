#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hte/trial_data.hpp"

namespace hte {

// Logistic-link data generator: outcome log-odds beta0 + beta'x + T*(gamma0 +
// gamma'x), continuous covariates standard normal, discrete ones fair
// Bernoulli, treatment Bernoulli(treat_prob).
struct DgpConfig {
  std::size_t n = 20000;
  std::size_t p_continuous = 20;
  std::size_t p_discrete = 0;
  double beta0 = 0.0;
  std::vector<double> beta;   // length p_continuous + p_discrete
  double gamma0 = 0.0;
  std::vector<double> gamma;  // length p
  double treat_prob = 0.5;
  std::optional<std::vector<std::size_t>> visible_features;
  std::uint64_t seed = 0;

  std::size_t p() const { return p_continuous + p_discrete; }
  void validate() const;
};

struct SimulatedTrial {
  TrialDataset data;               // restricted to visible features when set
  std::vector<double> true_ite;    // expit(eta + delta) - expit(eta)
  Matrix full_covariates;          // all features, for auditing
  std::vector<std::string> full_feature_names;
};

SimulatedTrial generate(const DgpConfig& config);

enum class SimPreset { I, II, III };

SimPreset sim_preset_from_string(const std::string& name);
std::string sim_preset_name(SimPreset preset);

// Frozen preset coefficients. Setting II keeps only the 6 features with the
// smallest |beta_j| + |gamma_j| visible (all of which carry zero interaction
// weight); Setting III swaps half the continuous features for discrete ones.
DgpConfig simulation_setting(SimPreset preset, std::size_t n, std::uint64_t seed);

}  // namespace hte
