/*
 * Copyright 2026 The netanomaly Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NETANOMALY_PREPROCESSING_HPP_
#define NETANOMALY_PREPROCESSING_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netanomaly/tensor.hpp"

namespace netanomaly {

enum class ColumnKind { kNumeric, kCategorical, kLabel };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  bool drop = false;

  bool operator==(const ColumnSpec&) const = default;
};

// Column layout of a CSV log file and the mapping of label strings onto the
// anomaly bit.
struct DatasetSchema {
  std::string name;
  std::vector<ColumnSpec> columns;
  // Label values mapped to anomaly = 1; every other label is normal = 0.
  std::set<std::string> positive_labels;
  bool has_header = false;
  char delimiter = ',';
  // Field values treated as missing (imputed for numerics).
  std::vector<std::string> missing_tokens = {"", "?", "NA", "NaN"};

  // Exactly one label column and at least one kept feature column.
  void validate() const;
  bool operator==(const DatasetSchema&) const = default;
};

struct Record {
  std::vector<double> features;
  std::vector<std::string> categories;  // raw categorical values, if any
  int label = 0;
  std::size_t row_index = 0;

  bool operator==(const Record&) const = default;
};

struct Dataset {
  std::vector<Record> records;
  std::vector<std::string> feature_names;
  std::vector<std::string> categorical_names;
  std::string provenance;

  std::size_t size() const noexcept { return records.size(); }
  std::size_t dim() const noexcept { return feature_names.size(); }
  // Throws InputError if records disagree with the declared names.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

// rows x dim matrix of the numeric features.
DenseArray feature_matrix(const Dataset& dataset);
std::vector<int> labels_of(const Dataset& dataset);
std::size_t count_label(const Dataset& dataset, int label);

struct CleaningReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t rows_excluded = 0;
  std::size_t unparseable_numeric = 0;
  std::size_t missing_label = 0;
  std::map<std::string, std::size_t> imputed_per_column;

  bool operator==(const CleaningReport&) const = default;
};

struct ParseResult {
  Dataset dataset;
  CleaningReport report;
};

// Parses CSV rows against `schema`. Rows with junk in a numeric column or a
// missing label are excluded and counted; missing numerics are imputed with
// the column median. Throws FormatError (with line) on a field-count
// mismatch and InputError if nothing survives.
ParseResult parse_dataset(std::istream& source, const DatasetSchema& schema);

// Splits one CSV line, honoring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line, char delimiter);

// Per-column vocabularies learned on the training split.
struct OneHotEncoder {
  std::vector<std::string> numeric_names;
  std::vector<std::string> categorical_names;
  std::vector<std::vector<std::string>> vocabularies;  // sorted

  std::size_t output_dim() const;
  bool operator==(const OneHotEncoder&) const = default;
};

OneHotEncoder fit_one_hot(const Dataset& train);
// Each categorical column becomes a block of |vocabulary| binary columns;
// unseen values become an all-zero block. Throws InputError if the dataset's
// columns differ from the encoder's.
Dataset one_hot_encode(const OneHotEncoder& encoder, const Dataset& dataset);

enum class NormalizationMode { kMinMax, kZScore };

struct NormalizationParams {
  NormalizationMode mode = NormalizationMode::kZScore;
  // min/max for kMinMax, mean/stddev for kZScore.
  std::vector<double> first;
  std::vector<double> second;

  bool operator==(const NormalizationParams&) const = default;
};

NormalizationParams fit_normalizer(const Dataset& train, NormalizationMode mode);
// Constant columns map to 0 in both modes.
Dataset apply_normalizer(const NormalizationParams& params,
                         const Dataset& dataset);

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Seeded shuffle, then floor(n * train_frac) rows to the train pool and the
// rest to test; floor(pool * val_frac_of_train) of the pool goes to val.
// Each split is returned in original row order. Throws InputError if any
// split is empty or a fraction is outside (0, 1).
Splits split_dataset(const Dataset& dataset, double train_frac,
                     double val_frac_of_train, std::uint64_t seed);

struct EigenDecomposition {
  std::vector<double> values;  // descending
  DenseArray vectors;          // column i pairs with values[i]
};

// Cyclic Jacobi rotations on a symmetric matrix until the off-diagonal
// Frobenius norm drops below `tolerance`.
EigenDecomposition jacobi_eigen(const DenseArray& symmetric,
                                double tolerance = 1e-10,
                                std::size_t max_sweeps = 100);

struct PcaModel {
  DenseArray mean;        // 1 x d
  DenseArray projection;  // d x k, orthonormal columns
  std::vector<double> explained_variance;  // ratio per kept component

  std::size_t components() const noexcept { return projection.cols(); }
  bool operator==(const PcaModel&) const = default;
};

// Throws InputError unless 1 <= k <= dim.
PcaModel fit_pca(const Dataset& train, std::size_t k);
Dataset apply_pca(const PcaModel& pca, const Dataset& dataset);
// Maps projected rows back to the original (uncentered) feature space.
DenseArray reconstruct_pca(const PcaModel& pca, const DenseArray& projected);

// Drops rows whose |z| exceeds `max_abs_z` in any feature, with statistics
// from `dataset` itself.
Dataset filter_outliers(const Dataset& dataset, double max_abs_z = 8.0);

struct PreprocessOptions {
  NormalizationMode normalization = NormalizationMode::kZScore;
  std::size_t pca_components = 0;  // 0 disables PCA
  bool outlier_filter = false;
  double outlier_z = 8.0;

  bool operator==(const PreprocessOptions&) const = default;
};

// Encoder, normalizer and optional PCA fitted on a training split.
struct FeatureTransform {
  PreprocessOptions options;
  OneHotEncoder encoder;
  NormalizationParams normalizer;
  std::optional<PcaModel> pca;

  std::size_t output_dim() const;
  bool operator==(const FeatureTransform&) const = default;
};

FeatureTransform fit_transform(const Dataset& train,
                               const PreprocessOptions& options);
Dataset apply_transform(const FeatureTransform& transform,
                        const Dataset& dataset);

// Writes `dataset` as CSV with a header of feature names plus `label`.
void write_canonical_csv(std::ostream& out, const Dataset& dataset);

// Schema matching write_canonical_csv output (label values "0"/"1").
DatasetSchema canonical_schema(const Dataset& dataset);

}  // namespace netanomaly

#endif  // NETANOMALY_PREPROCESSING_HPP_
