#include "hte/report.hpp"

#include <cmath>
#include <cstdio>

#include "hte/csv.hpp"

namespace hte {

std::string format_fixed(double value, int decimals) {
  if (!std::isfinite(value)) return "-";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  return buffer;
}

std::string format_full(double value) {
  if (!std::isfinite(value)) return "-";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

namespace {

std::string opt_cell(const std::optional<double>& value) {
  return value ? format_fixed(*value, 3) : "-";
}

}  // namespace

void emit_metrics_table(const std::filesystem::path& path, const std::vector<TableRow>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const auto& row : rows) {
    if (!row.ok || (!row.train && !row.test)) {
      body.push_back({row.estimator, "-", "-", "-", "-", "-", "-"});
      continue;
    }
    auto cell = [](const MetricReport* report, const std::optional<double> MetricReport::* field) {
      return report ? opt_cell(report->*field) : std::string("-");
    };
    body.push_back({row.estimator, cell(row.train, &MetricReport::c_for_benefit),
                    cell(row.test, &MetricReport::c_for_benefit),
                    cell(row.train, &MetricReport::mbc), cell(row.test, &MetricReport::mbc),
                    cell(row.train, &MetricReport::pseudo_r2),
                    cell(row.test, &MetricReport::pseudo_r2)});
  }
  write_csv(path,
            {"estimator", "cfb_train", "cfb_test", "mbc_train", "mbc_test", "pseudo_r2_train",
             "pseudo_r2_test"},
            body);
}

void emit_subgroup_ate(const std::filesystem::path& path, const LabeledReports& reports) {
  std::vector<std::vector<std::string>> body;
  for (const auto& [split, report] : reports) {
    for (std::size_t b = 0; b < report->bins.bins.size(); ++b) {
      const auto& bin = report->bins.bins[b];
      const auto& s = bin.observed;
      body.push_back({split, std::to_string(b + 1), std::to_string(bin.n),
                      format_full(bin.ite_lo), format_full(bin.ite_hi),
                      format_full(bin.mean_predicted_ite), format_full(s.risk_difference),
                      format_full(s.rd_ci.lo), format_full(s.rd_ci.hi),
                      format_full(s.risk_ratio), format_full(s.rr_ci.lo),
                      format_full(s.rr_ci.hi), format_full(s.odds_ratio),
                      format_full(s.or_ci.lo), format_full(s.or_ci.hi),
                      s.continuity_corrected ? "1" : "0"});
    }
  }
  write_csv(path,
            {"split", "bin", "n", "ite_lo", "ite_hi", "mean_predicted_ite", "risk_difference",
             "rd_ci_lo", "rd_ci_hi", "risk_ratio", "rr_ci_lo", "rr_ci_hi", "odds_ratio",
             "or_ci_lo", "or_ci_hi", "continuity_corrected"},
            body);
}

void emit_outcome_ite_curves(const std::filesystem::path& path, const LabeledReports& reports) {
  std::vector<std::vector<std::string>> body;
  auto append = [&](const std::string& split, const std::string& arm,
                    const std::vector<CurvePoint>& points) {
    for (const auto& point : points) {
      body.push_back({split, arm, format_full(point.ite), format_full(point.probability),
                      format_full(point.lower), format_full(point.upper)});
    }
  };
  for (const auto& [split, report] : reports) {
    append(split, "control", report->curves.control);
    append(split, "treated", report->curves.treated);
  }
  write_csv(path, {"split", "arm", "ite", "probability", "ci_lo", "ci_hi"}, body);
}

void emit_calibration(const std::filesystem::path& path, const LabeledReports& reports) {
  std::vector<std::vector<std::string>> body;
  auto append = [&](const std::string& split, const std::string& arm,
                    const std::vector<CalibrationPoint>& points) {
    for (std::size_t b = 0; b < points.size(); ++b) {
      body.push_back({split, arm, std::to_string(b + 1), format_full(points[b].mean_predicted),
                      format_full(points[b].observed_rate), std::to_string(points[b].n)});
    }
  };
  for (const auto& [split, report] : reports) {
    append(split, "control", report->calibration_control);
    append(split, "treated", report->calibration_treated);
  }
  write_csv(path, {"split", "arm", "bin", "mean_predicted", "observed_rate", "n"}, body);
}

void emit_roc(const std::filesystem::path& path, const LabeledReports& reports) {
  std::vector<std::vector<std::string>> body;
  auto append = [&](const std::string& split, const std::string& arm,
                    const std::vector<std::pair<double, double>>& points) {
    for (const auto& [fpr, tpr] : points) {
      body.push_back({split, arm, format_full(fpr), format_full(tpr)});
    }
  };
  for (const auto& [split, report] : reports) {
    append(split, "control", report->roc_control);
    append(split, "treated", report->roc_treated);
  }
  write_csv(path, {"split", "arm", "fpr", "tpr"}, body);
}

void emit_ite_density(const std::filesystem::path& path, const LabeledValues& ite_by_split) {
  std::vector<std::vector<std::string>> body;
  for (const auto& [split, values] : ite_by_split) {
    for (double v : *values) body.push_back({split, format_full(v)});
  }
  write_csv(path, {"split", "ite"}, body);
}

void emit_benefit_harm_density(const std::filesystem::path& path,
                               const std::vector<RunResult>& results) {
  std::vector<std::vector<std::string>> body;
  auto append = [&](const RunResult& run, const std::string& split, const BenefitHarm& strata) {
    auto row = [&](const std::string& name, const StratumSummary& stratum) {
      if (!stratum.available) return;
      body.push_back({run.estimator, std::to_string(run.replicate), split, name,
                      std::to_string(stratum.n), format_full(stratum.summary.risk_difference),
                      format_full(stratum.summary.risk_ratio)});
    };
    row("benefit", strata.benefit);
    row("harm", strata.harm);
  };
  for (const auto& run : results) {
    if (!run.ok) continue;
    append(run, "train", run.train_report.strata);
    append(run, "test", run.test_report.strata);
  }
  write_csv(path,
            {"estimator", "replicate", "split", "stratum", "n", "risk_difference", "risk_ratio"},
            body);
}

}  // namespace hte
