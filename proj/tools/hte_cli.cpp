// hte: estimate individualized treatment effects from randomized-trial data
// and validate them with train/test, geographic, combined, external, and
// simulation protocols.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hte/csv.hpp"
#include "hte/error.hpp"
#include "hte/report.hpp"
#include "hte/simulation.hpp"
#include "hte/svg.hpp"
#include "hte/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

int exit_code_for(const hte::Error& e) {
  switch (e.code()) {
    case hte::ErrorCode::ConfigInvalid:
    case hte::ErrorCode::UnknownKind:
    case hte::ErrorCode::InvalidArgument:
      return kExitConfig;
    case hte::ErrorCode::IoError:
    case hte::ErrorCode::MissingColumn:
    case hte::ErrorCode::NonBinaryValue:
    case hte::ErrorCode::EmptyAfterFiltering:
    case hte::ErrorCode::FeatureAbsent:
    case hte::ErrorCode::SchemaMismatch:
    case hte::ErrorCode::IdMismatch:
    case hte::ErrorCode::NoRegionColumn:
    case hte::ErrorCode::EmptyPartition:
      return kExitData;
    default:
      return kExitInternal;
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) hte::raise(hte::ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---------------------------------------------------------------------------
// Config parsing

hte::ColumnMapping parse_mapping(const json& node) {
  if (!node.is_object()) hte::raise(hte::ErrorCode::ConfigInvalid, "mapping must be an object");
  hte::ColumnMapping mapping;
  for (const auto& [key, value] : node.items()) {
    if (key == "treatment") {
      mapping.treatment_column = value.get<std::string>();
    } else if (key == "outcome") {
      mapping.outcome_column = value.get<std::string>();
    } else if (key == "covariates") {
      for (const auto& column : value) {
        const std::string name = column.at("name").get<std::string>();
        const std::string kind = column.value("kind", "numeric");
        if (kind != "numeric" && kind != "categorical") {
          hte::raise(hte::ErrorCode::ConfigInvalid,
                     "covariate '" + name + "' has unknown kind '" + kind + "'");
        }
        mapping.covariate_columns.emplace_back(
            name, kind == "numeric" ? hte::ColumnKind::Numeric : hte::ColumnKind::Categorical);
      }
    } else if (key == "region") {
      mapping.region_column = value.get<std::string>();
    } else if (key == "missing_token") {
      mapping.missing_token = value.get<std::string>();
    } else {
      hte::raise(hte::ErrorCode::ConfigInvalid, "unknown mapping key '" + key + "'");
    }
  }
  mapping.validate();
  return mapping;
}

void apply_estimator_params(const json& params, hte::EstimatorConfig& config) {
  for (const auto& [key, value] : params.items()) {
    if (key == "alpha") {
      config.base.alpha = value.get<double>();
    } else if (key == "cv_folds") {
      config.base.cv_folds = value.get<int>();
    } else if (key == "ridge_eps") {
      config.base.ridge_eps = value.get<double>();
    } else if (key == "n_trees") {
      config.base.forest.n_trees = value.get<int>();
      config.causal_forest.n_trees = value.get<int>();
    } else if (key == "max_depth") {
      config.base.forest.max_depth = value.get<int>();
      config.base.boost.max_depth = value.get<int>();
      config.base.tree_max_depth = value.get<int>();
      config.causal_forest.max_depth = value.get<int>();
    } else if (key == "min_leaf") {
      config.base.forest.min_leaf = value.get<int>();
      config.base.boost.min_leaf = value.get<int>();
      config.base.tree_min_leaf = value.get<int>();
    } else if (key == "mtry") {
      config.base.forest.mtry = value.get<int>();
      config.causal_forest.mtry = value.get<int>();
    } else if (key == "bootstrap") {
      config.base.forest.bootstrap = value.get<bool>();
    } else if (key == "n_rounds") {
      config.base.boost.n_rounds = value.get<int>();
    } else if (key == "learning_rate") {
      config.base.boost.learning_rate = value.get<double>();
    } else if (key == "leaf_penalty") {
      config.base.boost.leaf_penalty = value.get<double>();
    } else if (key == "interactions") {
      config.s_interactions = value.get<bool>();
    } else if (key == "g") {
      config.x_weight_g = value.get<double>();
    } else if (key == "propensity") {
      config.propensity = value.get<double>();
    } else if (key == "folds") {
      config.dr_folds = value.get<int>();
    } else if (key == "min_leaf_per_arm") {
      config.causal_forest.min_leaf_per_arm = value.get<int>();
    } else if (key == "honesty_fraction") {
      config.causal_forest.honesty_fraction = value.get<double>();
    } else if (key == "subsample_fraction") {
      config.causal_forest.subsample_fraction = value.get<double>();
    } else if (key == "effect_base") {
      config.effect_base = config.base;
      config.effect_base.kind = hte::learner_kind_from_string(value.get<std::string>());
      config.effect_base_set = true;
    } else {
      hte::raise(hte::ErrorCode::ConfigInvalid,
                 "unknown estimator param '" + key + "' for '" + config.name + "'");
    }
  }
}

struct DatasetEntry {
  fs::path path;
  std::string label;
  std::string content_hash;
  std::size_t rows_loaded = 0;
  std::size_t rows_dropped = 0;
};

struct ParsedValidateConfig {
  hte::ValidationPlan plan;
  std::vector<DatasetEntry> datasets;
  std::string config_hash;
};

ParsedValidateConfig parse_validate_config(const fs::path& config_path) {
  const std::string bytes = read_file(config_path);
  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::exception& e) {
    hte::raise(hte::ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }

  ParsedValidateConfig parsed;
  parsed.config_hash = hte::fnv1a_hex(bytes);
  hte::ValidationPlan& plan = parsed.plan;

  std::vector<std::string> shared_features;
  json datasets_node, estimators_node;
  for (const auto& [key, value] : root.items()) {
    if (key == "mode") {
      plan.mode = hte::plan_mode_from_string(value.get<std::string>());
    } else if (key == "datasets") {
      datasets_node = value;
    } else if (key == "estimators") {
      estimators_node = value;
    } else if (key == "train_fraction") {
      plan.train_fraction = value.get<double>();
    } else if (key == "replicates") {
      plan.replicates = value.get<int>();
    } else if (key == "k_bins") {
      plan.k_bins = value.get<int>();
    } else if (key == "seed") {
      plan.master_seed = value.get<std::uint64_t>();
    } else if (key == "train_regions") {
      for (const auto& region : value) plan.train_regions.insert(region.get<std::string>());
    } else if (key == "shared_features") {
      for (const auto& name : value) shared_features.push_back(name.get<std::string>());
    } else if (key == "mbc_max_pairs") {
      plan.mbc_max_pairs = value.get<std::size_t>();
    } else if (key == "curve_grid_size") {
      plan.curve_grid_size = value.get<int>();
    } else {
      hte::raise(hte::ErrorCode::ConfigInvalid, "unknown config key '" + key + "'");
    }
  }

  if (!datasets_node.is_array() || datasets_node.empty()) {
    hte::raise(hte::ErrorCode::ConfigInvalid, "config needs a non-empty 'datasets' array");
  }
  if (!estimators_node.is_array() || estimators_node.empty()) {
    hte::raise(hte::ErrorCode::ConfigInvalid, "config needs a non-empty 'estimators' array");
  }

  const fs::path base_dir = config_path.has_parent_path() ? config_path.parent_path() : ".";
  for (const auto& node : datasets_node) {
    DatasetEntry entry;
    fs::path path = node.at("path").get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    entry.path = path;
    entry.label = node.value("label", path.stem().string());
    const hte::ColumnMapping mapping = parse_mapping(node.at("mapping"));
    entry.content_hash = hte::fnv1a_hex(read_file(path));
    hte::LoadResult loaded = hte::load_csv_dataset(path, mapping, entry.label);
    entry.rows_loaded = loaded.data.n();
    entry.rows_dropped = loaded.dropped_rows;
    plan.datasets.push_back(std::move(loaded.data));
    parsed.datasets.push_back(entry);
  }
  if (!shared_features.empty()) plan.datasets = hte::harmonize(plan.datasets, shared_features);

  const std::vector<std::string> registry = hte::registered_estimator_names();
  std::set<std::string> seen;
  for (const auto& node : estimators_node) {
    hte::PlanEstimator estimator;
    estimator.config.name = node.at("name").get<std::string>();
    if (std::find(registry.begin(), registry.end(), estimator.config.name) == registry.end()) {
      hte::raise(hte::ErrorCode::ConfigInvalid,
                 "unknown estimator name '" + estimator.config.name + "'");
    }
    if (!seen.insert(estimator.config.name).second) {
      hte::raise(hte::ErrorCode::ConfigInvalid,
                 "estimator '" + estimator.config.name + "' listed twice");
    }
    if (node.contains("params")) apply_estimator_params(node.at("params"), estimator.config);
    estimator.replicates = node.value("replicates", 0);
    plan.estimators.push_back(std::move(estimator));
  }
  return parsed;
}

// ---------------------------------------------------------------------------
// validate

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-') {
      out += c;
    } else {
      out += '_';
    }
  }
  return out;
}

void emit_detail_files(const fs::path& dir, const hte::RunResult& run) {
  const hte::LabeledReports reports = {{"train", &run.train_report},
                                       {"test", &run.test_report}};
  hte::emit_subgroup_ate(dir / "subgroup_ate.csv", reports);
  hte::emit_outcome_ite_curves(dir / "outcome_ite_curves.csv", reports);
  hte::emit_calibration(dir / "calibration.csv", reports);
  hte::emit_roc(dir / "roc.csv", reports);
  hte::emit_ite_density(dir / "ite_density.csv",
                        {{"train", &run.ite_train}, {"test", &run.ite_test}});
}

int cmd_validate(const fs::path& config_path, const fs::path& out_dir) {
  const ParsedValidateConfig parsed = parse_validate_config(config_path);
  const hte::ValidationPlan& plan = parsed.plan;

  const std::vector<hte::RunResult> results = hte::run_plan(plan);
  fs::create_directories(out_dir);

  // Table rows: replicate 0 per estimator (internal), or one row per
  // direction (external), in config order.
  std::vector<hte::TableRow> table_rows;
  for (const auto& estimator : plan.estimators) {
    for (const auto& run : results) {
      if (run.estimator != estimator.config.name) continue;
      if (plan.mode != hte::PlanMode::External && run.replicate != 0) continue;
      hte::TableRow row;
      row.estimator = plan.mode == hte::PlanMode::External
                          ? run.estimator + "[" + run.split_label + "]"
                          : run.estimator;
      row.ok = run.ok;
      row.train = &run.train_report;
      row.test = &run.test_report;
      table_rows.push_back(row);
      if (!run.ok) {
        std::cerr << "estimator " << run.estimator << " (" << run.split_label
                  << ") unavailable: " << run.error << "\n";
      }
    }
  }
  hte::emit_metrics_table(out_dir / "metrics_table.csv", table_rows);
  hte::emit_benefit_harm_density(out_dir / "benefit_harm_density.csv", results);

  for (const auto& run : results) {
    if (!run.ok) continue;
    if (plan.mode == hte::PlanMode::External) {
      emit_detail_files(out_dir / sanitize_label(run.estimator) / sanitize_label(run.split_label),
                        run);
    } else if (run.replicate == 0) {
      emit_detail_files(out_dir / sanitize_label(run.estimator), run);
    }
  }

  json manifest;
  manifest["version"] = kVersion;
  manifest["config_hash"] = parsed.config_hash;
  manifest["mode"] = hte::plan_mode_name(plan.mode);
  manifest["seed"] = plan.master_seed;
  manifest["replicates"] = plan.replicates;
  manifest["k_bins"] = plan.k_bins;
  manifest["train_fraction"] = plan.train_fraction;
  manifest["datasets"] = json::array();
  for (const auto& entry : parsed.datasets) {
    manifest["datasets"].push_back({{"path", entry.path.string()},
                                    {"hash", entry.content_hash},
                                    {"label", entry.label},
                                    {"rows_loaded", entry.rows_loaded},
                                    {"rows_dropped", entry.rows_dropped}});
  }
  manifest["estimators"] = json::array();
  for (const auto& estimator : plan.estimators) {
    manifest["estimators"].push_back(estimator.config.name);
  }
  manifest["runs"] = json::array();
  for (const auto& run : results) {
    manifest["runs"].push_back({{"estimator", run.estimator},
                                {"replicate", run.replicate},
                                {"split", run.split_label},
                                {"ok", run.ok},
                                {"error", run.error}});
  }
  hte::write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

  const bool any_ok = std::any_of(results.begin(), results.end(),
                                  [](const hte::RunResult& r) { return r.ok; });
  if (!any_ok) {
    std::cerr << "no estimator completed\n";
    return kExitInternal;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& setting, std::size_t n, std::uint64_t seed,
                 const fs::path& out_dir) {
  const hte::SimPreset preset = hte::sim_preset_from_string(setting);
  const hte::DgpConfig config = hte::simulation_setting(preset, n, seed);
  const hte::SimulatedTrial trial = hte::generate(config);
  fs::create_directories(out_dir);

  std::vector<std::string> header = trial.data.feature_names;
  header.push_back("treatment");
  header.push_back("outcome");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trial.data.n());
  for (std::size_t i = 0; i < trial.data.n(); ++i) {
    std::vector<std::string> row;
    row.reserve(header.size());
    for (std::size_t j = 0; j < trial.data.n_features(); ++j) {
      row.push_back(hte::format_full(trial.data.covariates(i, j)));
    }
    row.push_back(std::to_string(trial.data.treatment[i]));
    row.push_back(std::to_string(trial.data.outcome[i]));
    rows.push_back(std::move(row));
  }
  hte::write_csv(out_dir / "trial.csv", header, rows);

  std::vector<std::vector<std::string>> ite_rows;
  ite_rows.reserve(trial.true_ite.size());
  for (std::size_t i = 0; i < trial.true_ite.size(); ++i) {
    ite_rows.push_back({std::to_string(i), hte::format_full(trial.true_ite[i])});
  }
  hte::write_csv(out_dir / "true_ite.csv", {"patient_id", "true_ite"}, ite_rows);

  json dgp;
  dgp["setting"] = hte::sim_preset_name(preset);
  dgp["n"] = config.n;
  dgp["p_continuous"] = config.p_continuous;
  dgp["p_discrete"] = config.p_discrete;
  dgp["beta0"] = config.beta0;
  dgp["beta"] = config.beta;
  dgp["gamma0"] = config.gamma0;
  dgp["gamma"] = config.gamma;
  dgp["treat_prob"] = config.treat_prob;
  dgp["seed"] = config.seed;
  if (config.visible_features) dgp["visible_features"] = *config.visible_features;
  hte::write_text_file(out_dir / "dgp.json", dgp.dump(2) + "\n");

  json mapping;
  mapping["treatment"] = "treatment";
  mapping["outcome"] = "outcome";
  mapping["covariates"] = json::array();
  for (const auto& name : trial.data.feature_names) {
    mapping["covariates"].push_back({{"name", name}, {"kind", "numeric"}});
  }
  hte::write_text_file(out_dir / "mapping.json", mapping.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// metrics

int cmd_metrics(const fs::path& pred_path, const fs::path& data_path, const fs::path& mapping_path,
                const fs::path& out_dir) {
  json mapping_json;
  try {
    mapping_json = json::parse(read_file(mapping_path));
  } catch (const json::exception& e) {
    hte::raise(hte::ErrorCode::ConfigInvalid, std::string("mapping is not valid JSON: ") + e.what());
  }
  const hte::ColumnMapping mapping = parse_mapping(mapping_json);
  const hte::LoadResult loaded = hte::load_csv_dataset(data_path, mapping);
  const hte::TrialDataset& data = loaded.data;

  const hte::CsvTable pred = hte::read_csv(pred_path);
  const std::size_t id_col = pred.column_index("patient_id");
  const std::size_t ite_col = pred.column_index("ite");
  if (id_col == hte::CsvTable::npos || ite_col == hte::CsvTable::npos) {
    hte::raise(hte::ErrorCode::ConfigInvalid, "predictions need patient_id and ite columns");
  }
  const std::size_t mu0_col = pred.column_index("mu0");
  const std::size_t mu1_col = pred.column_index("mu1");
  const bool has_mu = mu0_col != hte::CsvTable::npos && mu1_col != hte::CsvTable::npos;

  if (pred.rows.size() != data.n()) {
    hte::raise(hte::ErrorCode::IdMismatch,
               "predictions have " + std::to_string(pred.rows.size()) + " rows, data has " +
                   std::to_string(data.n()));
  }
  std::vector<double> ite(data.n()), mu0(data.n()), mu1(data.n());
  std::vector<bool> seen(data.n(), false);
  for (const auto& row : pred.rows) {
    char* end = nullptr;
    const unsigned long long id = std::strtoull(row[id_col].c_str(), &end, 10);
    if (end == row[id_col].c_str() || id >= data.n() || seen[id]) {
      hte::raise(hte::ErrorCode::IdMismatch, "patient_id '" + row[id_col] + "' out of range");
    }
    seen[id] = true;
    ite[id] = std::strtod(row[ite_col].c_str(), nullptr);
    if (has_mu) {
      mu0[id] = std::strtod(row[mu0_col].c_str(), nullptr);
      mu1[id] = std::strtod(row[mu1_col].c_str(), nullptr);
    }
  }

  hte::MbcOptions mbc;
  mbc.seed = 0;
  const hte::MetricReport report = hte::compute_metric_report_from_predictions(
      ite, has_mu ? &mu0 : nullptr, has_mu ? &mu1 : nullptr, data, 10, mbc);

  fs::create_directories(out_dir);
  hte::TableRow row;
  row.estimator = "external_predictions";
  row.ok = true;
  row.test = &report;  // single supplied set scores as a test partition
  hte::emit_metrics_table(out_dir / "metrics_table.csv", {row});

  const hte::LabeledReports reports = {{"all", &report}};
  hte::emit_subgroup_ate(out_dir / "subgroup_ate.csv", reports);
  hte::emit_outcome_ite_curves(out_dir / "outcome_ite_curves.csv", reports);
  hte::emit_calibration(out_dir / "calibration.csv", reports);
  hte::emit_roc(out_dir / "roc.csv", reports);
  hte::emit_ite_density(out_dir / "ite_density.csv", {{"all", &ite}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"individualized treatment effect estimation and validation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir;
  auto* validate = app.add_subcommand("validate", "run a validation plan from a JSON config");
  validate->add_option("--config", config_path, "JSON config file")->required();
  validate->add_option("--out", out_dir, "output directory")->required();

  std::string setting = "I";
  std::size_t sim_n = 20000;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic trial with true ITEs");
  simulate->add_option("--setting", setting, "I, II, or III")->required();
  simulate->add_option("--n", sim_n, "sample size");
  simulate->add_option("--seed", sim_seed, "generator seed");
  simulate->add_option("--out", sim_out, "output directory")->required();

  std::string pred_path, data_path, mapping_path, metrics_out;
  auto* metrics = app.add_subcommand("metrics", "score externally supplied ITE predictions");
  metrics->add_option("--pred", pred_path, "predictions CSV (patient_id, ite[, mu0, mu1])")
      ->required();
  metrics->add_option("--data", data_path, "trial CSV")->required();
  metrics->add_option("--mapping", mapping_path, "column mapping JSON")->required();
  metrics->add_option("--out", metrics_out, "output directory")->required();

  std::string chart_kind, chart_in, chart_out;
  auto* chart = app.add_subcommand("chart", "render an emitted CSV as an SVG chart");
  chart->add_option("--kind", chart_kind, "csv kind")->required();
  chart->add_option("--in", chart_in, "input CSV")->required();
  chart->add_option("--out", chart_out, "output SVG")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(config_path, out_dir);
    if (simulate->parsed()) return cmd_simulate(setting, sim_n, sim_seed, sim_out);
    if (metrics->parsed()) return cmd_metrics(pred_path, data_path, mapping_path, metrics_out);
    if (chart->parsed()) {
      hte::emit_svg_chart(chart_kind, chart_in, chart_out);
      return kExitOk;
    }
  } catch (const hte::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitConfig;
}
