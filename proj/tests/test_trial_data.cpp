#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "hte/csv.hpp"
#include "hte/error.hpp"
#include "hte/trial_data.hpp"

using namespace hte;

namespace {

std::filesystem::path write_temp_csv(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::trunc);
  out << content;
  return path;
}

ColumnMapping basic_mapping() {
  ColumnMapping mapping;
  mapping.treatment_column = "t";
  mapping.outcome_column = "y";
  mapping.covariate_columns = {{"age", ColumnKind::Numeric}, {"sex", ColumnKind::Categorical}};
  return mapping;
}

TrialDataset toy_dataset(std::size_t n, unsigned pattern = 0x5a5a) {
  TrialDataset data;
  data.covariates = Matrix(n, 2);
  data.feature_names = {"a", "b"};
  data.source_label = "toy";
  for (std::size_t i = 0; i < n; ++i) {
    data.covariates(i, 0) = static_cast<double>(i);
    data.covariates(i, 1) = static_cast<double>(i % 3);
    data.treatment.push_back(static_cast<int>((i ^ (pattern >> (i % 8))) & 1));
    data.outcome.push_back(static_cast<int>(i % 2));
  }
  data.row_source.assign(n, "toy");
  // make sure both arms exist
  data.treatment[0] = 0;
  data.treatment[1] = 1;
  return data;
}

}  // namespace

TEST_CASE("load_csv_dataset keeps complete rows and counts drops") {
  const auto path = write_temp_csv("hte_load_ok.csv",
                                   "t,y,age,sex\n"
                                   "0,1,62,M\n"
                                   "1,0,58,F\n"
                                   "0,0,71,F\n"
                                   "1,1,66,M\n");
  const LoadResult result = load_csv_dataset(path, basic_mapping());
  CHECK(result.data.n() == 4);
  CHECK(result.dropped_rows == 0);
  // categorical one-hot drops the reference level (F < M lexicographically)
  CHECK(result.data.feature_names == std::vector<std::string>{"age", "sex=M"});
  CHECK(result.data.covariates(0, 0) == 62.0);
  CHECK(result.data.covariates(0, 1) == 1.0);
  CHECK(result.data.covariates(1, 1) == 0.0);
}

TEST_CASE("load_csv_dataset drops rows with missing mapped cells") {
  const auto path = write_temp_csv("hte_load_missing.csv",
                                   "t,y,age,sex,junk\n"
                                   "0,1,62,M,x\n"
                                   "1,0,,F,x\n"
                                   "0,0,71,F,\n"
                                   "1,1,66,,x\n"
                                   "0,1,59,F,x\n"
                                   "1,0,63,M,x\n");
  const LoadResult result = load_csv_dataset(path, basic_mapping());
  // rows 2 and 4 are incomplete in mapped columns; the missing junk cell is unmapped
  CHECK(result.data.n() == 4);
  CHECK(result.dropped_rows == 2);
}

TEST_CASE("load_csv_dataset error paths") {
  ColumnMapping mapping = basic_mapping();

  const auto missing_col = write_temp_csv("hte_missing_col.csv", "t,y,age\n0,1,40\n");
  try {
    load_csv_dataset(missing_col, mapping);
    FAIL("expected MissingColumn");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingColumn);
    CHECK(std::string(e.what()).find("sex") != std::string::npos);
  }

  const auto bad_binary = write_temp_csv("hte_bad_binary.csv",
                                         "t,y,age,sex\n2,1,40,M\n0,0,41,F\n");
  try {
    load_csv_dataset(bad_binary, mapping);
    FAIL("expected NonBinaryValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonBinaryValue);
  }

  const auto all_missing = write_temp_csv("hte_all_missing.csv",
                                          "t,y,age,sex\n0,1,,M\n1,0,,F\n");
  try {
    load_csv_dataset(all_missing, mapping);
    FAIL("expected EmptyAfterFiltering");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyAfterFiltering);
  }
}

TEST_CASE("complete-case filtering is idempotent") {
  const auto path = write_temp_csv("hte_idem.csv",
                                   "t,y,age,sex\n"
                                   "0,1,62,M\n"
                                   "1,0,,F\n"
                                   "0,0,71,F\n"
                                   "1,1,66,M\n");
  const LoadResult first = load_csv_dataset(path, basic_mapping());
  CHECK(first.dropped_rows == 1);

  // re-serialize the filtered dataset and load again: nothing more drops
  std::string csv = "t,y,age,sex=M\n";
  for (std::size_t i = 0; i < first.data.n(); ++i) {
    csv += std::to_string(first.data.treatment[i]) + "," +
           std::to_string(first.data.outcome[i]) + "," +
           std::to_string(first.data.covariates(i, 0)) + "," +
           std::to_string(first.data.covariates(i, 1)) + "\n";
  }
  const auto path2 = write_temp_csv("hte_idem2.csv", csv);
  ColumnMapping mapping2;
  mapping2.treatment_column = "t";
  mapping2.outcome_column = "y";
  mapping2.covariate_columns = {{"age", ColumnKind::Numeric}, {"sex=M", ColumnKind::Numeric}};
  const LoadResult second = load_csv_dataset(path2, mapping2);
  CHECK(second.dropped_rows == 0);
  CHECK(second.data.n() == first.data.n());
}

TEST_CASE("random_split sizes follow round(n * fraction)") {
  const TrialDataset big = toy_dataset(19435);
  const SplitAssignment split = random_split(big, 2.0 / 3.0, 1);
  CHECK(split.train_indices.size() == 12957);  // round(19435 * 2/3)
  CHECK(split.test_indices.size() == 6478);

  const TrialDataset tiny = toy_dataset(3);
  const SplitAssignment small = random_split(tiny, 2.0 / 3.0, 1);
  CHECK(small.train_indices.size() == 2);
  CHECK(small.test_indices.size() == 1);
}

TEST_CASE("random_split is deterministic and partitions all rows") {
  const TrialDataset data = toy_dataset(200);
  const SplitAssignment a = random_split(data, 2.0 / 3.0, 42);
  const SplitAssignment b = random_split(data, 2.0 / 3.0, 42);
  CHECK(a.train_indices == b.train_indices);
  CHECK(a.test_indices == b.test_indices);

  std::set<std::size_t> all(a.train_indices.begin(), a.train_indices.end());
  CHECK(all.size() == a.train_indices.size());
  for (std::size_t i : a.test_indices) CHECK(all.insert(i).second);
  CHECK(all.size() == 200);

  const SplitAssignment c = random_split(data, 2.0 / 3.0, 43);
  CHECK(c.train_indices != a.train_indices);
}

TEST_CASE("random_split keeps treated fraction near the full-data fraction") {
  const std::size_t n = 2000;
  TrialDataset data = toy_dataset(n);
  double full_fraction = 0.0;
  for (int t : data.treatment) full_fraction += t;
  full_fraction /= static_cast<double>(n);

  int violations = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SplitAssignment split = random_split(data, 2.0 / 3.0, seed);
    double train_fraction = 0.0;
    for (std::size_t i : split.train_indices) train_fraction += data.treatment[i];
    train_fraction /= static_cast<double>(split.train_indices.size());
    if (std::abs(train_fraction - full_fraction) > 0.02) ++violations;
  }
  CHECK(violations <= 1);  // >= 99% of seeds within +-0.02
}

TEST_CASE("geographic_split partitions by region") {
  TrialDataset data = toy_dataset(10);
  data.region = {"EU", "US", "ASIA", "EU", "US", "ASIA", "EU", "US", "EU", "ASIA"};

  const SplitAssignment split = geographic_split(data, {"EU", "US"});
  CHECK(split.method == SplitMethod::Geographic);
  CHECK(split.train_indices.size() == 7);  // 4 EU + 3 US by hand count
  CHECK(split.test_indices.size() == 3);
  for (std::size_t i : split.test_indices) CHECK(data.region[i] == "ASIA");

  try {
    geographic_split(data, {"EU", "US", "ASIA"});
    FAIL("expected EmptyPartition");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyPartition);
  }

  TrialDataset no_region = toy_dataset(10);
  try {
    geographic_split(no_region, {"EU"});
    FAIL("expected NoRegionColumn");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoRegionColumn);
  }
}

TEST_CASE("harmonize restricts to shared features in order") {
  TrialDataset a = toy_dataset(6);
  a.feature_names = {"age", "sex=M"};
  TrialDataset b = toy_dataset(8);
  b.feature_names = {"sex=M", "age"};  // different order on purpose
  for (std::size_t i = 0; i < b.n(); ++i) {
    b.covariates(i, 0) = 100.0 + static_cast<double>(i);  // sex=M column
    b.covariates(i, 1) = static_cast<double>(i);          // age column
  }

  const auto out = harmonize({a, b}, {"age", "sex=M"});
  CHECK(out[0].feature_names == std::vector<std::string>{"age", "sex=M"});
  CHECK(out[1].feature_names == std::vector<std::string>{"age", "sex=M"});
  CHECK(out[1].covariates(3, 0) == 3.0);    // age moved to column 0
  CHECK(out[1].covariates(3, 1) == 103.0);  // sex=M moved to column 1

  // identity case
  const auto same = harmonize({a}, a.feature_names);
  CHECK(same[0].covariates.data() == a.covariates.data());

  try {
    harmonize({a}, {"age", "bmi"});
    FAIL("expected FeatureAbsent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FeatureAbsent);
    CHECK(std::string(e.what()).find("bmi") != std::string::npos);
  }
}

TEST_CASE("merge concatenates rows and keeps provenance") {
  TrialDataset a = toy_dataset(5);
  a.source_label = "A";
  a.row_source.assign(5, "A");
  TrialDataset b = toy_dataset(7);
  b.source_label = "B";
  b.row_source.assign(7, "B");

  const TrialDataset merged = merge({a, b});
  CHECK(merged.n() == 12);
  CHECK(merged.row_source[0] == "A");
  CHECK(merged.row_source[11] == "B");
  CHECK(merged.covariates(5, 0) == b.covariates(0, 0));

  const TrialDataset solo = merge({a});
  CHECK(solo.n() == a.n());
  CHECK(solo.covariates.data() == a.covariates.data());

  TrialDataset mismatched = b;
  mismatched.feature_names = {"b", "a"};
  try {
    merge({a, mismatched});
    FAIL("expected SchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaMismatch);
  }
}

TEST_CASE("harmonize then merge yields the requested column order") {
  TrialDataset a = toy_dataset(4);
  a.feature_names = {"x1", "x2"};
  TrialDataset b = toy_dataset(4);
  b.feature_names = {"x2", "x1"};

  const std::vector<std::string> shared = {"x2", "x1"};
  const TrialDataset merged = merge(harmonize({a, b}, shared));
  CHECK(merged.feature_names == shared);
  CHECK(merged.n() == 8);
}

TEST_CASE("dataset invariants are enforced") {
  TrialDataset data = toy_dataset(6);
  data.outcome[2] = 7;
  CHECK_THROWS_AS(data.validate(), Error);

  TrialDataset one_arm = toy_dataset(6);
  for (auto& t : one_arm.treatment) t = 1;
  CHECK_THROWS_AS(one_arm.validate(), Error);
}

TEST_CASE("csv reader handles quoted fields") {
  const auto path = write_temp_csv("hte_quoted.csv",
                                   "a,b\n\"x,y\",\"with \"\"quotes\"\"\"\n1,2\n");
  const CsvTable table = read_csv(path);
  CHECK(table.rows.size() == 2);
  CHECK(table.rows[0][0] == "x,y");
  CHECK(table.rows[0][1] == "with \"quotes\"");
}
