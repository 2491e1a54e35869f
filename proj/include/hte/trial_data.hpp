#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hte/matrix.hpp"

namespace hte {

// One (sub)trial: numeric covariates (categoricals already one-hot expanded),
// binary treatment and outcome, optional region labels, per-row provenance.
struct TrialDataset {
  Matrix covariates;
  std::vector<int> treatment;  // 1 = treated
  std::vector<int> outcome;    // 1 = event
  std::vector<std::string> feature_names;
  std::vector<std::string> region;      // empty when no region column
  std::vector<std::string> row_source;  // provenance label per row
  std::string source_label;

  std::size_t n() const { return treatment.size(); }
  std::size_t n_features() const { return covariates.cols(); }
  bool has_region() const { return !region.empty(); }

  std::size_t n_treated() const;
  std::size_t n_control() const;

  TrialDataset subset(const std::vector<std::size_t>& indices) const;

  // Throws on any structural invariant violation.
  void validate() const;
};

enum class ColumnKind { Numeric, Categorical };

struct ColumnMapping {
  std::string treatment_column;
  std::string outcome_column;
  std::vector<std::pair<std::string, ColumnKind>> covariate_columns;
  std::optional<std::string> region_column;
  std::string missing_token;  // empty cell by default

  void validate() const;
};

enum class SplitMethod { Random, Geographic, External };

struct SplitAssignment {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  SplitMethod method = SplitMethod::Random;
};

struct LoadResult {
  TrialDataset data;
  std::size_t dropped_rows = 0;  // complete-case filter count
};

LoadResult load_csv_dataset(const std::filesystem::path& path, const ColumnMapping& mapping,
                            const std::string& source_label = "");

// Builds a dataset from an in-memory table with the same semantics as
// load_csv_dataset (complete-case filter, one-hot expansion).
struct CsvTable;
LoadResult build_dataset(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows,
                         const ColumnMapping& mapping, const std::string& source_label);

// |train| = round(n * train_fraction); both parts must contain both arms
// (bounded resampling on violation, then DegenerateSplit).
SplitAssignment random_split(const TrialDataset& data, double train_fraction, std::uint64_t seed);

SplitAssignment geographic_split(const TrialDataset& data,
                                 const std::set<std::string>& train_regions);

// Restrict every dataset to shared_features, in that exact column order.
std::vector<TrialDataset> harmonize(const std::vector<TrialDataset>& datasets,
                                    const std::vector<std::string>& shared_features);

// Row-concatenation of schema-identical datasets; per-row provenance kept.
TrialDataset merge(const std::vector<TrialDataset>& datasets);

}  // namespace hte
