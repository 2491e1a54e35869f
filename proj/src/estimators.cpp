#include "hte/estimators.hpp"

#include "hte/error.hpp"

namespace hte {

namespace {

struct ParsedName {
  std::string meta;
  std::string base;
};

ParsedName parse_name(const std::string& name) {
  const std::size_t dot = name.find('.');
  if (dot == std::string::npos) return {name, ""};
  return {name.substr(0, dot), name.substr(dot + 1)};
}

}  // namespace

std::unique_ptr<IteEstimator> fit_named_estimator(const EstimatorConfig& config,
                                                  const TrialDataset& data, std::uint64_t seed) {
  const ParsedName parsed = parse_name(config.name);
  if (parsed.meta == "causal_forest") {
    return std::make_unique<CausalForestModel>(
        fit_causal_forest(data, config.causal_forest, seed));
  }

  LearnerSpec base = config.base;
  base.kind = learner_kind_from_string(parsed.base);
  LearnerSpec effect = config.effect_base_set ? config.effect_base : base;
  if (!config.effect_base_set) effect.kind = base.kind;

  if (parsed.meta == "t_learner") return fit_t_learner(data, base, seed);
  if (parsed.meta == "s_learner") return fit_s_learner(data, base, config.s_interactions, seed);
  if (parsed.meta == "x_learner") {
    return fit_x_learner(data, base, effect, config.x_weight_g, seed);
  }
  if (parsed.meta == "dr_learner") {
    return fit_dr_learner(data, base, effect, config.propensity, config.dr_folds, seed);
  }
  raise(ErrorCode::UnknownKind, "unknown estimator '" + config.name + "'");
}

std::vector<std::string> registered_estimator_names() {
  std::vector<std::string> names;
  const std::vector<std::string> bases = {"logistic", "penalized_logistic", "tree",
                                          "random_forest", "gradient_boosting"};
  for (const auto& meta : {"t_learner", "s_learner"}) {
    for (const auto& base : bases) names.push_back(std::string(meta) + "." + base);
  }
  // X and DR final stages regress continuous effects; boosting is outcome-only.
  const std::vector<std::string> effect_bases = {"logistic", "penalized_logistic", "tree",
                                                 "random_forest"};
  for (const auto& meta : {"x_learner", "dr_learner"}) {
    for (const auto& base : effect_bases) names.push_back(std::string(meta) + "." + base);
  }
  names.push_back("causal_forest");
  return names;
}

}  // namespace hte
