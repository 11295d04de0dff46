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

#ifndef NETANOMALY_METRICS_HPP_
#define NETANOMALY_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace netanomaly {

// Positive class is anomaly = 1.
struct ConfusionCounts {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Throws InputError on a length mismatch or empty input.
ConfusionCounts confusion(std::span<const int> predictions,
                          std::span<const int> labels);

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators yield 0 for precision, recall and F1.
ClassificationMetrics classification_metrics(const ConfusionCounts& counts);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

// Empirical ROC curve, one point per distinct score (descending) plus the
// origin at threshold +inf. A point at threshold t counts scores >= t as positive.
std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const int> labels);

// Trapezoidal area under roc_curve. Equal scores form one step, which makes
// the result equal to the Mann-Whitney statistic with half credit for ties.
// Throws UndefinedMetricError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct ResourceProfile {
  double parameters_m = 0.0;
  double flops_g = 0.0;
  double inference_time_ms = 0.0;
  double training_time_s = 0.0;
  std::uint64_t parameter_count = 0;
  std::uint64_t flop_count = 0;

  bool operator==(const ResourceProfile&) const = default;
};

// Parameters in a stack of dense layers, widths[0] -> widths[1] -> ...
std::uint64_t dense_parameter_count(std::span<const std::size_t> widths);

// Counts -> millions/billions; timings copied through.
ResourceProfile resource_profile(std::uint64_t parameter_count,
                                 std::uint64_t flop_count,
                                 double inference_time_ms,
                                 double training_time_s);

struct MetricsReport {
  std::string name;
  ConfusionCounts counts;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  double threshold = 0.0;
  // Window AUC of the mean forest score alone, when a forest exists.
  std::optional<double> forest_auc;
  ResourceProfile resources;
  std::uint64_t seed = 0;
  std::string environment;
  std::string config_json;  // resolved configuration, serialized

  bool operator==(const MetricsReport&) const = default;
};

// Fills the rate fields of `report` from its counts.
void fill_rates(MetricsReport& report);

// Percent table in the layout of a comparison row: Accuracy, Recall,
// F1 Score, AUC.
std::string format_summary_table(std::span<const MetricsReport> reports);

// Ablation layout: Model, Accuracy, Recall, Precision, F1 Score, AUC,
// Training Time, Inference Time, Parameters.
std::string format_ablation_table(std::span<const MetricsReport> reports);

}  // namespace netanomaly

#endif  // NETANOMALY_METRICS_HPP_
