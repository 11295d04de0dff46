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

#include "netanomaly/preprocessing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "netanomaly/error.hpp"
#include "netanomaly/random.hpp"

namespace netanomaly {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_number(const std::string& s) {
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

std::string normalize_label(std::string s) {
  s = trim(s);
  // KDD-style files end labels with a period.
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

Dataset with_records(const Dataset& like, std::vector<Record> records) {
  Dataset out;
  out.records = std::move(records);
  out.feature_names = like.feature_names;
  out.categorical_names = like.categorical_names;
  out.provenance = like.provenance;
  return out;
}

void require_nonempty(const Dataset& d, const char* what) {
  if (d.records.empty()) throw InputError(std::string(what) + ": empty dataset");
}

}  // namespace

void DatasetSchema::validate() const {
  std::size_t labels = 0, features = 0;
  for (const auto& c : columns) {
    if (c.kind == ColumnKind::kLabel) {
      ++labels;
    } else if (!c.drop) {
      ++features;
    }
  }
  if (labels != 1) {
    throw InputError("schema '" + name + "': expected exactly one label column, found " +
                     std::to_string(labels));
  }
  if (features == 0) {
    throw InputError("schema '" + name + "': no feature columns");
  }
}

void Dataset::validate() const {
  for (const auto& r : records) {
    if (r.features.size() != feature_names.size() ||
        r.categories.size() != categorical_names.size()) {
      throw InputError("dataset: record " + std::to_string(r.row_index) +
                       " does not match the declared columns");
    }
    if (r.label != 0 && r.label != 1) {
      throw InputError("dataset: record " + std::to_string(r.row_index) +
                       " has label " + std::to_string(r.label));
    }
  }
}

DenseArray feature_matrix(const Dataset& dataset) {
  DenseArray out(dataset.size(), dataset.dim());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& f = dataset.records[i].features;
    std::copy(f.begin(), f.end(), out.row(i).begin());
  }
  return out;
}

std::vector<int> labels_of(const Dataset& dataset) {
  std::vector<int> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset.records) out.push_back(r.label);
  return out;
}

std::size_t count_label(const Dataset& dataset, int label) {
  return static_cast<std::size_t>(
      std::count_if(dataset.records.begin(), dataset.records.end(),
                    [&](const Record& r) { return r.label == label; }));
}

std::vector<std::string> split_csv_line(const std::string& line,
                                        char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delimiter) {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  fields.push_back(trim(current));
  return fields;
}

ParseResult parse_dataset(std::istream& source, const DatasetSchema& schema) {
  schema.validate();
  ParseResult result;
  Dataset& ds = result.dataset;
  CleaningReport& report = result.report;
  ds.provenance = "parsed with schema '" + schema.name + "'";

  std::vector<std::size_t> numeric_cols, categorical_cols;
  std::size_t label_col = 0;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const ColumnSpec& spec = schema.columns[c];
    if (spec.kind == ColumnKind::kLabel) {
      label_col = c;
    } else if (spec.drop) {
      continue;
    } else if (spec.kind == ColumnKind::kNumeric) {
      numeric_cols.push_back(c);
      ds.feature_names.push_back(spec.name);
    } else {
      categorical_cols.push_back(c);
      ds.categorical_names.push_back(spec.name);
    }
  }
  auto is_missing = [&](const std::string& v) {
    return std::find(schema.missing_tokens.begin(), schema.missing_tokens.end(),
                     v) != schema.missing_tokens.end();
  };

  // Missing numerics are recorded as NaN and imputed after the pass.
  std::vector<std::vector<double>> parseable(numeric_cols.size());
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = schema.has_header;
  while (std::getline(source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, schema.delimiter);
    if (fields.size() != schema.columns.size()) {
      throw FormatError("expected " + std::to_string(schema.columns.size()) +
                            " fields, found " + std::to_string(fields.size()),
                        line_no);
    }
    if (header_pending) {
      header_pending = false;
      continue;
    }
    ++report.rows_read;

    const std::string label = normalize_label(fields[label_col]);
    if (is_missing(label)) {
      ++report.missing_label;
      ++report.rows_excluded;
      continue;
    }
    Record rec;
    rec.row_index = report.rows_read - 1;
    rec.label = schema.positive_labels.contains(label) ? 1 : 0;
    bool junk = false;
    for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
      const std::string& field = fields[numeric_cols[k]];
      if (is_missing(field)) {
        rec.features.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto value = parse_number(field);
      if (!value) {
        junk = true;
        break;
      }
      rec.features.push_back(*value);
    }
    if (junk) {
      ++report.unparseable_numeric;
      ++report.rows_excluded;
      continue;
    }
    for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
      if (!std::isnan(rec.features[k])) parseable[k].push_back(rec.features[k]);
    }
    for (std::size_t c : categorical_cols) rec.categories.push_back(fields[c]);
    ds.records.push_back(std::move(rec));
  }
  if (header_pending && line_no == 0) {
    throw FormatError("missing header line", 1);
  }

  for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
    const double fill = median(parseable[k]);
    std::size_t imputed = 0;
    for (auto& r : ds.records) {
      if (std::isnan(r.features[k])) {
        r.features[k] = fill;
        ++imputed;
      }
    }
    if (imputed > 0) report.imputed_per_column[ds.feature_names[k]] = imputed;
  }
  report.rows_kept = ds.records.size();
  if (ds.records.empty()) {
    throw InputError("parse_dataset: no usable rows after cleaning");
  }
  return result;
}

std::size_t OneHotEncoder::output_dim() const {
  std::size_t n = numeric_names.size();
  for (const auto& v : vocabularies) n += v.size();
  return n;
}

OneHotEncoder fit_one_hot(const Dataset& train) {
  OneHotEncoder enc;
  enc.numeric_names = train.feature_names;
  enc.categorical_names = train.categorical_names;
  enc.vocabularies.resize(train.categorical_names.size());
  for (std::size_t c = 0; c < train.categorical_names.size(); ++c) {
    std::set<std::string> values;
    for (const auto& r : train.records) values.insert(r.categories[c]);
    enc.vocabularies[c].assign(values.begin(), values.end());
  }
  return enc;
}

Dataset one_hot_encode(const OneHotEncoder& encoder, const Dataset& dataset) {
  if (dataset.feature_names != encoder.numeric_names ||
      dataset.categorical_names != encoder.categorical_names) {
    throw InputError("one_hot_encode: dataset columns do not match the encoder");
  }
  Dataset out;
  out.provenance = dataset.provenance;
  out.feature_names = encoder.numeric_names;
  for (std::size_t c = 0; c < encoder.categorical_names.size(); ++c)
    for (const auto& v : encoder.vocabularies[c])
      out.feature_names.push_back(encoder.categorical_names[c] + "=" + v);
  out.records.reserve(dataset.size());
  for (const auto& r : dataset.records) {
    Record rec;
    rec.label = r.label;
    rec.row_index = r.row_index;
    rec.features = r.features;
    for (std::size_t c = 0; c < encoder.vocabularies.size(); ++c) {
      const auto& vocab = encoder.vocabularies[c];
      const auto it = std::lower_bound(vocab.begin(), vocab.end(), r.categories[c]);
      const bool seen = it != vocab.end() && *it == r.categories[c];
      for (std::size_t j = 0; j < vocab.size(); ++j) {
        rec.features.push_back(
            seen && static_cast<std::size_t>(it - vocab.begin()) == j ? 1.0 : 0.0);
      }
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

NormalizationParams fit_normalizer(const Dataset& train,
                                   NormalizationMode mode) {
  require_nonempty(train, "fit_normalizer");
  const std::size_t d = train.dim();
  NormalizationParams p;
  p.mode = mode;
  p.first.assign(d, 0.0);
  p.second.assign(d, 0.0);
  const double n = static_cast<double>(train.size());
  for (std::size_t j = 0; j < d; ++j) {
    if (mode == NormalizationMode::kMinMax) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& r : train.records) {
        lo = std::min(lo, r.features[j]);
        hi = std::max(hi, r.features[j]);
      }
      p.first[j] = lo;
      p.second[j] = hi;
    } else {
      double mean = 0.0;
      for (const auto& r : train.records) mean += r.features[j];
      mean /= n;
      double var = 0.0;
      for (const auto& r : train.records)
        var += (r.features[j] - mean) * (r.features[j] - mean);
      p.first[j] = mean;
      p.second[j] = std::sqrt(var / n);
    }
  }
  return p;
}

Dataset apply_normalizer(const NormalizationParams& params,
                         const Dataset& dataset) {
  if (params.first.size() != dataset.dim()) {
    throw InputError("apply_normalizer: fitted on " +
                     std::to_string(params.first.size()) +
                     " features, dataset has " + std::to_string(dataset.dim()));
  }
  Dataset out = dataset;
  for (auto& r : out.records) {
    for (std::size_t j = 0; j < r.features.size(); ++j) {
      double& x = r.features[j];
      if (params.mode == NormalizationMode::kMinMax) {
        const double range = params.second[j] - params.first[j];
        x = range > 0.0 ? (x - params.first[j]) / range : 0.0;
      } else {
        x = params.second[j] > 0.0 ? (x - params.first[j]) / params.second[j]
                                   : 0.0;
      }
    }
  }
  return out;
}

Splits split_dataset(const Dataset& dataset, double train_frac,
                     double val_frac_of_train, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0) ||
      !(val_frac_of_train > 0.0 && val_frac_of_train < 1.0)) {
    throw InputError("split_dataset: fractions must lie in (0, 1)");
  }
  const std::size_t n = dataset.size();
  // The epsilon keeps exact products such as 100 * 0.7 from flooring down.
  const auto floor_of = [](double x) {
    return static_cast<std::size_t>(std::floor(x + 1e-9));
  };
  const std::size_t pool = floor_of(static_cast<double>(n) * train_frac);
  const std::size_t val = floor_of(static_cast<double>(pool) * val_frac_of_train);
  const std::size_t train = pool - val;
  const std::size_t test = n - pool;
  if (train == 0 || val == 0 || test == 0) {
    throw InputError("split_dataset: " + std::to_string(n) +
                     " records give an empty split (train " +
                     std::to_string(train) + ", val " + std::to_string(val) +
                     ", test " + std::to_string(test) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  auto take = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + begin,
                                 order.begin() + begin + count);
    std::sort(idx.begin(), idx.end());
    std::vector<Record> recs;
    recs.reserve(count);
    for (std::size_t i : idx) recs.push_back(dataset.records[i]);
    return with_records(dataset, std::move(recs));
  };
  return Splits{take(0, train), take(train, val), take(pool, test)};
}

EigenDecomposition jacobi_eigen(const DenseArray& symmetric, double tolerance,
                                std::size_t max_sweeps) {
  if (symmetric.rows() != symmetric.cols()) {
    throw ShapeError("jacobi_eigen: matrix " + symmetric.shape_string() +
                     " is not square");
  }
  const std::size_t n = symmetric.rows();
  DenseArray a = symmetric;
  DenseArray v = DenseArray::identity(n);
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  for (std::size_t sweep = 0; sweep < max_sweeps && off_norm() >= tolerance;
       ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  EigenDecomposition out{std::vector<double>(n), DenseArray(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

PcaModel fit_pca(const Dataset& train, std::size_t k) {
  require_nonempty(train, "fit_pca");
  const std::size_t d = train.dim();
  if (k == 0 || k > d) {
    throw InputError("fit_pca: k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(d) + "]");
  }
  const DenseArray x = feature_matrix(train);
  PcaModel pca;
  pca.mean = column_means(x);
  DenseArray centered = x;
  for (std::size_t i = 0; i < centered.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) centered(i, j) -= pca.mean(0, j);
  const double denom = static_cast<double>(std::max<std::size_t>(1, x.rows() - 1));
  const DenseArray cov = scale(transposed_matmul(centered, centered), 1.0 / denom);
  const EigenDecomposition eig = jacobi_eigen(cov);

  double total = 0.0;
  for (double v : eig.values) total += std::max(v, 0.0);
  pca.projection = slice_cols(eig.vectors, 0, k);
  for (std::size_t c = 0; c < k; ++c) {
    pca.explained_variance.push_back(
        total > 0.0 ? std::max(eig.values[c], 0.0) / total : 0.0);
  }
  return pca;
}

Dataset apply_pca(const PcaModel& pca, const Dataset& dataset) {
  if (dataset.dim() != pca.mean.cols()) {
    throw InputError("apply_pca: fitted on " + std::to_string(pca.mean.cols()) +
                     " features, dataset has " + std::to_string(dataset.dim()));
  }
  DenseArray x = feature_matrix(dataset);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= pca.mean(0, j);
  const DenseArray projected = matmul(x, pca.projection);
  Dataset out = dataset;
  out.feature_names.clear();
  for (std::size_t c = 0; c < pca.components(); ++c)
    out.feature_names.push_back("pc" + std::to_string(c));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto row = projected.row(i);
    out.records[i].features.assign(row.begin(), row.end());
  }
  return out;
}

DenseArray reconstruct_pca(const PcaModel& pca, const DenseArray& projected) {
  DenseArray x = matmul_transposed(projected, pca.projection);
  return add_row_broadcast(x, pca.mean);
}

Dataset filter_outliers(const Dataset& dataset, double max_abs_z) {
  if (dataset.records.empty()) return dataset;
  const NormalizationParams stats =
      fit_normalizer(dataset, NormalizationMode::kZScore);
  std::vector<Record> kept;
  for (const auto& r : dataset.records) {
    bool outlier = false;
    for (std::size_t j = 0; j < r.features.size() && !outlier; ++j) {
      if (stats.second[j] > 0.0 &&
          std::abs(r.features[j] - stats.first[j]) / stats.second[j] > max_abs_z)
        outlier = true;
    }
    if (!outlier) kept.push_back(r);
  }
  return with_records(dataset, std::move(kept));
}

std::size_t FeatureTransform::output_dim() const {
  return pca ? pca->components() : encoder.output_dim();
}

FeatureTransform fit_transform(const Dataset& train,
                               const PreprocessOptions& options) {
  require_nonempty(train, "fit_transform");
  FeatureTransform t;
  t.options = options;
  t.encoder = fit_one_hot(train);
  const Dataset encoded = one_hot_encode(t.encoder, train);
  t.normalizer = fit_normalizer(encoded, options.normalization);
  if (options.pca_components > 0) {
    t.pca = fit_pca(apply_normalizer(t.normalizer, encoded),
                    options.pca_components);
  }
  return t;
}

Dataset apply_transform(const FeatureTransform& transform,
                        const Dataset& dataset) {
  Dataset out =
      apply_normalizer(transform.normalizer, one_hot_encode(transform.encoder, dataset));
  if (transform.pca) out = apply_pca(*transform.pca, out);
  return out;
}

void write_canonical_csv(std::ostream& out, const Dataset& dataset) {
  for (const auto& name : dataset.feature_names) out << name << ',';
  for (const auto& name : dataset.categorical_names) out << name << ',';
  out << "label\n";
  std::ostringstream cell;
  cell << std::setprecision(17);
  for (const auto& r : dataset.records) {
    for (double v : r.features) {
      cell.str("");
      cell << v;
      out << cell.str() << ',';
    }
    for (const auto& c : r.categories) out << c << ',';
    out << r.label << '\n';
  }
}

DatasetSchema canonical_schema(const Dataset& dataset) {
  DatasetSchema s;
  s.name = "canonical";
  s.has_header = true;
  for (const auto& name : dataset.feature_names)
    s.columns.push_back({name, ColumnKind::kNumeric, false});
  for (const auto& name : dataset.categorical_names)
    s.columns.push_back({name, ColumnKind::kCategorical, false});
  s.columns.push_back({"label", ColumnKind::kLabel, false});
  s.positive_labels = {"1"};
  return s;
}

}  // namespace netanomaly
