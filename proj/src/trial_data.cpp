#include "hte/trial_data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "hte/csv.hpp"
#include "hte/error.hpp"
#include "hte/rng.hpp"

namespace hte {

std::size_t TrialDataset::n_treated() const {
  std::size_t count = 0;
  for (int t : treatment) count += static_cast<std::size_t>(t);
  return count;
}

std::size_t TrialDataset::n_control() const { return n() - n_treated(); }

TrialDataset TrialDataset::subset(const std::vector<std::size_t>& indices) const {
  TrialDataset out;
  out.covariates = covariates.select_rows(indices);
  out.treatment = select(treatment, indices);
  out.outcome = select(outcome, indices);
  out.feature_names = feature_names;
  if (!region.empty()) out.region = select(region, indices);
  if (!row_source.empty()) out.row_source = select(row_source, indices);
  out.source_label = source_label;
  return out;
}

void TrialDataset::validate() const {
  const std::size_t rows = n();
  if (rows < 2) raise(ErrorCode::InvalidArgument, "dataset needs at least 2 rows");
  if (outcome.size() != rows || covariates.rows() != rows) {
    raise(ErrorCode::ShapeMismatch, "row counts disagree across fields");
  }
  if (feature_names.size() != covariates.cols()) {
    raise(ErrorCode::ShapeMismatch, "feature_names length != matrix width");
  }
  if (!region.empty() && region.size() != rows) {
    raise(ErrorCode::ShapeMismatch, "region length != n");
  }
  for (int t : treatment) {
    if (t != 0 && t != 1) raise(ErrorCode::NonBinaryValue, "treatment outside {0,1}");
  }
  for (int y : outcome) {
    if (y != 0 && y != 1) raise(ErrorCode::NonBinaryValue, "outcome outside {0,1}");
  }
  const std::size_t treated = n_treated();
  if (treated == 0 || treated == rows) {
    raise(ErrorCode::ArmEmpty, "dataset must contain both treatment arms");
  }
  for (double v : covariates.data()) {
    if (!std::isfinite(v)) raise(ErrorCode::NonFinite, "covariate matrix has non-finite value");
  }
}

void ColumnMapping::validate() const {
  if (covariate_columns.empty()) {
    raise(ErrorCode::ConfigInvalid, "mapping needs at least one covariate column");
  }
  for (const auto& [name, kind] : covariate_columns) {
    (void)kind;
    if (name == treatment_column || name == outcome_column) {
      raise(ErrorCode::ConfigInvalid,
            "treatment/outcome column '" + name + "' also listed as covariate");
    }
  }
}

namespace {

// Accepts 0/1 plus a few common textual spellings seen in trial exports.
int parse_binary(const std::string& cell, const std::string& column) {
  if (cell == "0" || cell == "0.0") return 0;
  if (cell == "1" || cell == "1.0") return 1;
  if (cell == "Y" || cell == "y" || cell == "TRUE" || cell == "true") return 1;
  if (cell == "N" || cell == "n" || cell == "FALSE" || cell == "false") return 0;
  raise(ErrorCode::NonBinaryValue, "column '" + column + "' value '" + cell + "' not in {0,1}");
}

bool parse_numeric(const std::string& cell, double& out) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t') ++end;
  return *end == '\0' && std::isfinite(out);
}

}  // namespace

LoadResult build_dataset(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows,
                         const ColumnMapping& mapping, const std::string& source_label) {
  mapping.validate();

  auto find_column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    raise(ErrorCode::MissingColumn, "column '" + name + "' absent from header");
  };

  const std::size_t treatment_col = find_column(mapping.treatment_column);
  const std::size_t outcome_col = find_column(mapping.outcome_column);
  std::vector<std::size_t> covariate_cols;
  covariate_cols.reserve(mapping.covariate_columns.size());
  for (const auto& [name, kind] : mapping.covariate_columns) {
    (void)kind;
    covariate_cols.push_back(find_column(name));
  }
  std::size_t region_col = CsvTable::npos;
  if (mapping.region_column) region_col = find_column(*mapping.region_column);

  const std::string& missing = mapping.missing_token;
  auto is_missing = [&](const std::string& cell) { return cell == missing; };

  // Complete-case filter over the mapped columns only.
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    bool complete = !is_missing(row[treatment_col]) && !is_missing(row[outcome_col]);
    if (complete && region_col != CsvTable::npos) complete = !is_missing(row[region_col]);
    for (std::size_t c : covariate_cols) {
      if (!complete) break;
      complete = !is_missing(row[c]);
    }
    if (complete) kept.push_back(r);
  }
  if (kept.empty()) raise(ErrorCode::EmptyAfterFiltering, "no complete rows");

  // Categorical columns: collect sorted category sets, drop the first level.
  std::vector<std::vector<std::string>> categories(mapping.covariate_columns.size());
  for (std::size_t j = 0; j < mapping.covariate_columns.size(); ++j) {
    if (mapping.covariate_columns[j].second != ColumnKind::Categorical) continue;
    std::set<std::string> seen;
    for (std::size_t r : kept) seen.insert(rows[r][covariate_cols[j]]);
    categories[j].assign(seen.begin(), seen.end());
  }

  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < mapping.covariate_columns.size(); ++j) {
    const auto& [name, kind] = mapping.covariate_columns[j];
    if (kind == ColumnKind::Numeric) {
      feature_names.push_back(name);
    } else {
      for (std::size_t c = 1; c < categories[j].size(); ++c) {
        feature_names.push_back(name + "=" + categories[j][c]);
      }
    }
  }

  TrialDataset data;
  data.feature_names = feature_names;
  data.covariates = Matrix(kept.size(), feature_names.size());
  data.treatment.reserve(kept.size());
  data.outcome.reserve(kept.size());
  data.source_label = source_label;
  data.row_source.assign(kept.size(), source_label);
  if (region_col != CsvTable::npos) data.region.reserve(kept.size());

  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& row = rows[kept[i]];
    data.treatment.push_back(parse_binary(row[treatment_col], mapping.treatment_column));
    data.outcome.push_back(parse_binary(row[outcome_col], mapping.outcome_column));
    if (region_col != CsvTable::npos) data.region.push_back(row[region_col]);

    std::size_t out_col = 0;
    for (std::size_t j = 0; j < mapping.covariate_columns.size(); ++j) {
      const auto& [name, kind] = mapping.covariate_columns[j];
      const std::string& cell = row[covariate_cols[j]];
      if (kind == ColumnKind::Numeric) {
        double value = 0.0;
        if (!parse_numeric(cell, value)) {
          raise(ErrorCode::NonFinite, "column '" + name + "' value '" + cell + "' not numeric");
        }
        data.covariates(i, out_col++) = value;
      } else {
        for (std::size_t c = 1; c < categories[j].size(); ++c) {
          data.covariates(i, out_col++) = (cell == categories[j][c]) ? 1.0 : 0.0;
        }
      }
    }
  }

  data.validate();
  return {std::move(data), rows.size() - kept.size()};
}

LoadResult load_csv_dataset(const std::filesystem::path& path, const ColumnMapping& mapping,
                            const std::string& source_label) {
  const CsvTable table = read_csv(path);
  const std::string label = source_label.empty() ? path.stem().string() : source_label;
  return build_dataset(table.header, table.rows, mapping, label);
}

namespace {

bool both_arms(const TrialDataset& data, const std::vector<std::size_t>& indices) {
  bool treated = false, control = false;
  for (std::size_t i : indices) {
    (data.treatment[i] ? treated : control) = true;
    if (treated && control) return true;
  }
  return false;
}

}  // namespace

SplitAssignment random_split(const TrialDataset& data, double train_fraction,
                             std::uint64_t seed) {
  const std::size_t n = data.n();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    raise(ErrorCode::InvalidArgument, "train_fraction must be in (0,1)");
  }
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  if (n_train < 1 || n - n_train < 1) {
    raise(ErrorCode::InvalidArgument, "split parts must each hold at least 1 row");
  }

  // Single-row parts cannot hold two arms; the check applies where attainable.
  constexpr int kMaxAttempts = 100;
  Rng rng(seed);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    SplitAssignment split;
    split.seed = seed;
    split.method = SplitMethod::Random;
    split.train_indices.assign(order.begin(), order.begin() + static_cast<long>(n_train));
    split.test_indices.assign(order.begin() + static_cast<long>(n_train), order.end());
    std::sort(split.train_indices.begin(), split.train_indices.end());
    std::sort(split.test_indices.begin(), split.test_indices.end());
    const bool train_ok = split.train_indices.size() < 2 || both_arms(data, split.train_indices);
    const bool test_ok = split.test_indices.size() < 2 || both_arms(data, split.test_indices);
    if (train_ok && test_ok) return split;
  }
  raise(ErrorCode::DegenerateSplit,
        "could not place both arms in both parts after 100 attempts");
}

SplitAssignment geographic_split(const TrialDataset& data,
                                 const std::set<std::string>& train_regions) {
  if (!data.has_region()) raise(ErrorCode::NoRegionColumn, "dataset has no region labels");
  if (train_regions.empty()) raise(ErrorCode::InvalidArgument, "train_regions is empty");

  SplitAssignment split;
  split.method = SplitMethod::Geographic;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (train_regions.count(data.region[i])) {
      split.train_indices.push_back(i);
    } else {
      split.test_indices.push_back(i);
    }
  }
  if (split.train_indices.empty() || split.test_indices.empty()) {
    raise(ErrorCode::EmptyPartition, "geographic split produced an empty partition");
  }
  return split;
}

std::vector<TrialDataset> harmonize(const std::vector<TrialDataset>& datasets,
                                    const std::vector<std::string>& shared_features) {
  std::vector<TrialDataset> out;
  out.reserve(datasets.size());
  for (const auto& data : datasets) {
    std::unordered_map<std::string, std::size_t> positions;
    for (std::size_t j = 0; j < data.feature_names.size(); ++j) {
      positions.emplace(data.feature_names[j], j);
    }
    std::vector<std::size_t> columns;
    columns.reserve(shared_features.size());
    for (const auto& name : shared_features) {
      auto it = positions.find(name);
      if (it == positions.end()) {
        raise(ErrorCode::FeatureAbsent,
              "dataset '" + data.source_label + "' lacks feature '" + name + "'");
      }
      columns.push_back(it->second);
    }
    TrialDataset reduced = data;
    reduced.covariates = data.covariates.select_cols(columns);
    reduced.feature_names = shared_features;
    out.push_back(std::move(reduced));
  }
  return out;
}

TrialDataset merge(const std::vector<TrialDataset>& datasets) {
  if (datasets.empty()) raise(ErrorCode::InvalidArgument, "nothing to merge");
  const auto& first = datasets.front();
  std::size_t total = 0;
  for (const auto& data : datasets) {
    if (data.feature_names != first.feature_names) {
      raise(ErrorCode::SchemaMismatch, "feature names/order differ across datasets");
    }
    total += data.n();
  }

  TrialDataset out;
  out.feature_names = first.feature_names;
  out.covariates = Matrix(total, first.n_features());
  out.treatment.reserve(total);
  out.outcome.reserve(total);
  out.row_source.reserve(total);
  const bool all_regions =
      std::all_of(datasets.begin(), datasets.end(),
                  [](const TrialDataset& d) { return d.has_region(); });

  std::size_t row = 0;
  std::string label;
  for (const auto& data : datasets) {
    for (std::size_t i = 0; i < data.n(); ++i, ++row) {
      const auto src = data.covariates.row(i);
      std::copy(src.begin(), src.end(), out.covariates.row(row).begin());
      out.treatment.push_back(data.treatment[i]);
      out.outcome.push_back(data.outcome[i]);
      out.row_source.push_back(data.row_source.empty() ? data.source_label
                                                       : data.row_source[i]);
      if (all_regions) out.region.push_back(data.region[i]);
    }
    label += (label.empty() ? "" : "+") + data.source_label;
  }
  out.source_label = label;
  out.validate();
  return out;
}

}  // namespace hte
