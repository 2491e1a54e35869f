#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hte/validation.hpp"

namespace hte {

// "-" for anything non-finite or unset, mirroring dash-annotated tables.
std::string format_fixed(double value, int decimals);
std::string format_full(double value);

std::string fnv1a_hex(const std::string& bytes);

struct TableRow {
  std::string estimator;
  bool ok = false;
  const MetricReport* train = nullptr;
  const MetricReport* test = nullptr;
};

// metrics_table.csv: one row per estimator, 3-decimal cells.
void emit_metrics_table(const std::filesystem::path& path, const std::vector<TableRow>& rows);

using LabeledReports = std::vector<std::pair<std::string, const MetricReport*>>;
using LabeledValues = std::vector<std::pair<std::string, const std::vector<double>*>>;

void emit_subgroup_ate(const std::filesystem::path& path, const LabeledReports& reports);
void emit_outcome_ite_curves(const std::filesystem::path& path, const LabeledReports& reports);
void emit_calibration(const std::filesystem::path& path, const LabeledReports& reports);
void emit_roc(const std::filesystem::path& path, const LabeledReports& reports);
void emit_ite_density(const std::filesystem::path& path, const LabeledValues& ite_by_split);

// Replicate-level benefit/harm stratum ATEs across all runs.
void emit_benefit_harm_density(const std::filesystem::path& path,
                               const std::vector<RunResult>& results);

}  // namespace hte
