#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hte/simulation.hpp"
#include "hte/validation.hpp"

namespace hte {

// One (setting, estimator, replicate) cell: the usual internal-validation
// metrics plus oracle columns against the known true ITEs.
struct SimulationCase {
  SimPreset preset = SimPreset::I;
  std::string estimator;
  RunResult run;
  double pehe_train = 0.0;
  double pehe_test = 0.0;
  double corr_train = 0.0;     // Pearson, estimated vs true ITE
  double corr_test = 0.0;
  double spearman_test = 0.0;
  std::vector<std::pair<double, double>> scatter_test;  // (true, estimated)
};

struct SimulationStudyReport {
  std::vector<SimulationCase> cases;
};

// Internal 2:1 validation on generated trials, one generated dataset per
// preset. Estimator name "oracle" injects the true-ITE predictor (presets
// with all features visible only). scatter_cap limits emitted scatter rows.
SimulationStudyReport run_simulation_study(const std::vector<SimPreset>& presets,
                                           const std::vector<PlanEstimator>& estimators,
                                           int replicates, std::size_t n, std::uint64_t seed,
                                           int k_bins = 10, std::size_t scatter_cap = 2000);

}  // namespace hte
