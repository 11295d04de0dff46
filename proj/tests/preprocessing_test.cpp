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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "netanomaly/error.hpp"
#include "netanomaly/preprocessing.hpp"
#include "netanomaly/serialization.hpp"
#include "support.hpp"

namespace na = netanomaly;
using na::DenseArray;

namespace {

na::DatasetSchema toy_schema() {
  na::DatasetSchema s;
  s.name = "toy";
  s.has_header = true;
  s.columns = {{"duration", na::ColumnKind::kNumeric, false},
               {"protocol", na::ColumnKind::kCategorical, false},
               {"bytes", na::ColumnKind::kNumeric, false},
               {"label", na::ColumnKind::kLabel, false}};
  s.positive_labels = {"attack"};
  return s;
}

na::ParseResult parse(const std::string& text, const na::DatasetSchema& schema) {
  std::istringstream in(text);
  return na::parse_dataset(in, schema);
}

na::Dataset numeric_dataset(const std::vector<std::vector<double>>& rows) {
  na::Dataset ds;
  for (std::size_t j = 0; j < rows.front().size(); ++j)
    ds.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < rows.size(); ++i)
    ds.records.push_back(na::Record{rows[i], {}, static_cast<int>(i % 2), i});
  return ds;
}

na::Dataset random_dataset(std::size_t n, std::size_t d, na::Rng& rng) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& r : rows)
    for (auto& v : r) v = rng.uniform(-5.0, 5.0) * (1.0 + rng.below(3));
  na::Dataset ds = numeric_dataset(rows);
  ds.categorical_names = {"proto"};
  const char* vocab[] = {"tcp", "udp", "icmp"};
  for (auto& r : ds.records) r.categories = {vocab[rng.below(3)]};
  return ds;
}

// Eigenvalues of a symmetric 3x3 matrix from the trigonometric solution of
// its characteristic cubic, descending.
std::vector<double> cubic_eigenvalues(const DenseArray& a) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  DenseArray b = a;
  for (std::size_t i = 0; i < 3; ++i) b(i, i) -= q;
  for (double& v : b.data()) v /= p;
  const double det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                     b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                     b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double phi = std::acos(std::clamp(det / 2.0, -1.0, 1.0)) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {e1, 3.0 * q - e1 - e3, e3};
}

}  // namespace

TEST_CASE("parse a well-formed file") {
  const auto r = parse(
      "duration,protocol,bytes,label\n"
      "1,tcp,100,normal\n"
      "2,udp,200,attack\n"
      "3,icmp,300,normal.\n",
      toy_schema());
  REQUIRE(r.dataset.size() == 3);
  CHECK(r.dataset.feature_names == std::vector<std::string>{"duration", "bytes"});
  CHECK(r.dataset.categorical_names == std::vector<std::string>{"protocol"});
  CHECK(na::labels_of(r.dataset) == std::vector<int>{0, 1, 0});
  CHECK(r.dataset.records[1].features == std::vector<double>{2.0, 200.0});
  CHECK(r.dataset.records[2].categories == std::vector<std::string>{"icmp"});
  CHECK(r.report.rows_read == 3);
  CHECK(r.report.rows_excluded == 0);
}

TEST_CASE("bundled NSL-KDD schema maps attack names to anomalies") {
  const na::DatasetSchema schema =
      na::load_schema(std::string(NETANOMALY_SOURCE_DIR) + "/data/schemas/nsl_kdd.json");
  std::size_t features = 0;
  for (const auto& c : schema.columns)
    features += static_cast<std::size_t>(c.kind != na::ColumnKind::kLabel && !c.drop);
  CHECK(features == 41);
  CHECK(schema.positive_labels.size() == 39);
  CHECK_FALSE(schema.positive_labels.contains("normal"));

  std::string row = "0,tcp,private,S0";
  for (int i = 0; i < 37; ++i) row += ",0";
  const auto r = parse(row + ",neptune,21\n" + row + ",normal,20\n", schema);
  CHECK(na::labels_of(r.dataset) == std::vector<int>{1, 0});
  CHECK(r.dataset.dim() == 38);
  CHECK(r.dataset.categorical_names.size() == 3);
}

TEST_CASE("junk rows are excluded and missing numerics imputed with the median") {
  const auto r = parse(
      "duration,protocol,bytes,label\n"
      "1,tcp,10,normal\n"
      "abc,tcp,20,normal\n"
      "?,udp,30,attack\n"
      "5,tcp,,normal\n"
      "7,udp,40,\n"
      "3,icmp,50,normal\n",
      toy_schema());
  CHECK(r.report.rows_read == 6);
  CHECK(r.report.rows_kept == 4);
  CHECK(r.report.rows_excluded == 2);
  CHECK(r.report.unparseable_numeric == 1);
  CHECK(r.report.missing_label == 1);
  CHECK(r.report.imputed_per_column.at("duration") == 1);
  CHECK(r.report.imputed_per_column.at("bytes") == 1);
  CHECK(r.dataset.records[1].features[0] == 3.0);   // median of 1, 5, 3
  CHECK(r.dataset.records[2].features[1] == 30.0);  // median of 10, 30, 50
  CHECK(r.dataset.records[1].row_index == 2);
}

TEST_CASE("parse errors") {
  try {
    parse("duration,protocol,bytes,label\n1,tcp,100,normal\n1,tcp,normal\n",
          toy_schema());
    FAIL("expected a format error");
  } catch (const na::FormatError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("duration,protocol,bytes,label\nx,tcp,1,normal\n", toy_schema()),
                  na::InputError);
  na::DatasetSchema no_label = toy_schema();
  no_label.columns.pop_back();
  CHECK_THROWS_AS(parse("1,tcp,1\n", no_label), na::InputError);
}

TEST_CASE("quoted CSV fields") {
  CHECK(na::split_csv_line(R"(a,"b,c", d ,"e""f")", ',') ==
        std::vector<std::string>{"a", "b,c", "d", "e\"f"});
  CHECK(na::split_csv_line("", ',') == std::vector<std::string>{""});
}

TEST_CASE("one-hot encoding uses the training vocabulary") {
  const auto train = parse(
      "duration,protocol,bytes,label\n"
      "1,tcp,1,normal\n2,udp,1,normal\n3,icmp,1,attack\n",
      toy_schema());
  const na::OneHotEncoder enc = na::fit_one_hot(train.dataset);
  CHECK(enc.vocabularies.front() == std::vector<std::string>{"icmp", "tcp", "udp"});
  CHECK(enc.output_dim() == 5);
  const na::Dataset encoded = na::one_hot_encode(enc, train.dataset);
  CHECK(encoded.feature_names.back() == "protocol=udp");
  CHECK(encoded.records[0].features == std::vector<double>{1, 1, 0, 1, 0});
  CHECK(encoded.records[1].features == std::vector<double>{2, 1, 0, 0, 1});
  CHECK(encoded.records[2].features == std::vector<double>{3, 1, 1, 0, 0});

  const auto test = parse("duration,protocol,bytes,label\n4,sctp,1,normal\n", toy_schema());
  CHECK(na::one_hot_encode(enc, test.dataset).records[0].features ==
        std::vector<double>{4, 1, 0, 0, 0});

  na::Dataset renamed = test.dataset;
  renamed.feature_names[0] = "other";
  CHECK_THROWS_AS(na::one_hot_encode(enc, renamed), na::InputError);
}

TEST_CASE("normalization fixtures") {
  const na::Dataset ds = numeric_dataset({{2.0, 7.0}, {4.0, 7.0}, {6.0, 7.0}});
  const auto minmax = na::fit_normalizer(ds, na::NormalizationMode::kMinMax);
  const na::Dataset scaled = na::apply_normalizer(minmax, ds);
  CHECK(scaled.records[0].features == std::vector<double>{0.0, 0.0});
  CHECK(scaled.records[1].features == std::vector<double>{0.5, 0.0});
  CHECK(scaled.records[2].features == std::vector<double>{1.0, 0.0});

  const auto z = na::fit_normalizer(ds, na::NormalizationMode::kZScore);
  const na::Dataset standardized = na::apply_normalizer(z, ds);
  CHECK(standardized.records[0].features[0] == doctest::Approx(-std::sqrt(1.5)));
  CHECK(standardized.records[2].features[1] == 0.0);

  // Standardizing standardized data is the identity.
  const na::Dataset twice = na::apply_normalizer(
      na::fit_normalizer(standardized, na::NormalizationMode::kZScore), standardized);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(twice.records[i].features[j] ==
            doctest::Approx(standardized.records[i].features[j]).epsilon(1e-12));

  CHECK_THROWS_AS(na::apply_normalizer(z, numeric_dataset({{1.0}})), na::InputError);
}

TEST_CASE("split sizes and disjointness") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 100; ++i) rows.push_back({static_cast<double>(i)});
  const na::Dataset ds = numeric_dataset(rows);
  const na::Splits s = na::split_dataset(ds, 0.7, 0.2, 11);
  CHECK(s.train.size() == 56);
  CHECK(s.val.size() == 14);
  CHECK(s.test.size() == 30);

  std::vector<std::size_t> all;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    for (std::size_t i = 1; i < part->size(); ++i)
      CHECK(part->records[i - 1].row_index < part->records[i].row_index);
    for (const auto& r : part->records) all.push_back(r.row_index);
  }
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

  const na::Splits again = na::split_dataset(ds, 0.7, 0.2, 11);
  CHECK(again.test == s.test);
  CHECK_FALSE(na::split_dataset(ds, 0.7, 0.2, 12).test == s.test);

  // Floor rounding always leaves a test row; with 4 records the validation
  // share of the 3-row pool floors to zero.
  const std::vector<std::vector<double>> ten(rows.begin(), rows.begin() + 10);
  CHECK(na::split_dataset(numeric_dataset(ten), 0.999, 0.2, 1).test.size() == 1);
  const std::vector<std::vector<double>> four(rows.begin(), rows.begin() + 4);
  CHECK_THROWS_AS(na::split_dataset(numeric_dataset(four), 0.999, 0.2, 1), na::InputError);
  CHECK_THROWS_AS(na::split_dataset(ds, 1.0, 0.2, 1), na::InputError);
  CHECK_THROWS_AS(na::split_dataset(ds, 0.7, 0.0, 1), na::InputError);
}

TEST_CASE("PCA on collinear data keeps all variance in one component") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 20; ++i) {
    const double t = i - 9.5;
    rows.push_back({1.0 + 2.0 * t, -3.0 + t, 0.5 * t});
  }
  const na::Dataset ds = numeric_dataset(rows);
  const na::PcaModel pca = na::fit_pca(ds, 1);
  CHECK(pca.explained_variance.front() == doctest::Approx(1.0).epsilon(1e-12));
  const na::Dataset projected = na::apply_pca(pca, ds);
  CHECK(projected.feature_names == std::vector<std::string>{"pc0"});
  const DenseArray back =
      na::reconstruct_pca(pca, na::feature_matrix(projected));
  const DenseArray original = na::feature_matrix(ds);
  for (std::size_t i = 0; i < original.size(); ++i)
    CHECK(back.data()[i] == doctest::Approx(original.data()[i]).epsilon(1e-9));

  CHECK_THROWS_AS(na::fit_pca(ds, 0), na::InputError);
  CHECK_THROWS_AS(na::fit_pca(ds, 4), na::InputError);
}

TEST_CASE("Jacobi eigenvalues match the closed-form cubic roots") {
  na::Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const DenseArray m = na::testing::random_array(3, 3, rng, -3, 3);
    const DenseArray sym = na::add(m, na::transpose(m));
    const na::EigenDecomposition eig = na::jacobi_eigen(sym);
    const std::vector<double> expected = cubic_eigenvalues(sym);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(eig.values[i] == doctest::Approx(expected[i]).epsilon(1e-8).scale(1.0));
    // A v = lambda v, columns orthonormal.
    const DenseArray av = na::matmul(sym, eig.vectors);
    const DenseArray gram = na::transposed_matmul(eig.vectors, eig.vectors);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(av(i, j) == doctest::Approx(eig.values[j] * eig.vectors(i, j)).scale(1.0).epsilon(1e-8));
        CHECK(gram(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
      }
    }
  }
  CHECK_THROWS_AS(na::jacobi_eigen(DenseArray(2, 3)), na::ShapeError);
}

TEST_CASE("PCA projections have orthonormal columns and descending variance") {
  na::Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const na::Dataset ds = random_dataset(60, 2 + rng.below(5), rng);
    const std::size_t k = 1 + rng.below(ds.dim());
    const na::PcaModel pca = na::fit_pca(ds, k);
    const DenseArray gram = na::transposed_matmul(pca.projection, pca.projection);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        CHECK(gram(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-9));
    CHECK(std::is_sorted(pca.explained_variance.rbegin(), pca.explained_variance.rend()));
    double total = 0.0;
    for (double v : pca.explained_variance) total += v;
    CHECK(total <= 1.0 + 1e-9);
  }
}

TEST_CASE("fitted transforms depend on the training split alone") {
  na::Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const na::Dataset ds = random_dataset(40 + rng.below(40), 1 + rng.below(4), rng);
    const na::Splits s = na::split_dataset(ds, 0.7, 0.2, rng.next_u64());
    na::PreprocessOptions opts;
    opts.normalization =
        rng.below(2) == 0 ? na::NormalizationMode::kZScore : na::NormalizationMode::kMinMax;
    opts.pca_components = rng.below(2);
    const na::FeatureTransform fitted = na::fit_transform(s.train, opts);

    // Normalizer statistics are those of the encoded training rows.
    const DenseArray encoded =
        na::feature_matrix(na::one_hot_encode(fitted.encoder, s.train));
    for (std::size_t j = 0; j < encoded.cols(); ++j) {
      double lo = encoded(0, j), mean = 0.0;
      for (std::size_t i = 0; i < encoded.rows(); ++i) {
        lo = std::min(lo, encoded(i, j));
        mean += encoded(i, j);
      }
      mean /= static_cast<double>(encoded.rows());
      const double expected =
          opts.normalization == na::NormalizationMode::kMinMax ? lo : mean;
      CHECK(fitted.normalizer.first[j] == doctest::Approx(expected).epsilon(1e-12));
    }

    const na::Dataset test_out = na::apply_transform(fitted, s.test);
    CHECK(test_out.dim() == fitted.output_dim());
    CHECK(test_out.size() == s.test.size());

    // The held-out transform is row-wise: one row's output ignores the others.
    na::Dataset single = s.test;
    single.records.resize(1);
    CHECK(na::apply_transform(fitted, single).records[0] == test_out.records[0]);

    if (opts.pca_components == 0 && opts.normalization == na::NormalizationMode::kMinMax) {
      const na::Dataset train_out = na::apply_transform(fitted, s.train);
      for (const auto& r : train_out.records)
        for (double v : r.features) {
          CHECK(v >= -1e-12);
          CHECK(v <= 1.0 + 1e-12);
        }
    }
  }
}

TEST_CASE("outlier filter") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 100; ++i) rows.push_back({static_cast<double>(i % 5), 1.0});
  rows.push_back({1000.0, 1.0});
  const na::Dataset ds = numeric_dataset(rows);
  const na::Dataset kept = na::filter_outliers(ds, 8.0);
  CHECK(kept.size() == 100);
  CHECK(na::filter_outliers(ds, 1e9).size() == 101);
}

TEST_CASE("canonical CSV round-trips") {
  na::Rng rng(24);
  na::Dataset ds = random_dataset(15, 3, rng);
  std::ostringstream out;
  na::write_canonical_csv(out, ds);
  std::istringstream in(out.str());
  const na::ParseResult back = na::parse_dataset(in, na::canonical_schema(ds));
  CHECK(back.dataset.feature_names == ds.feature_names);
  CHECK(back.dataset.categorical_names == ds.categorical_names);
  REQUIRE(back.dataset.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.dataset.records[i].features == ds.records[i].features);
    CHECK(back.dataset.records[i].categories == ds.records[i].categories);
    CHECK(back.dataset.records[i].label == ds.records[i].label);
  }
}
