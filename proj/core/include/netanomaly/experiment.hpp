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

#ifndef NETANOMALY_EXPERIMENT_HPP_
#define NETANOMALY_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netanomaly/metrics.hpp"
#include "netanomaly/pipeline.hpp"
#include "netanomaly/preprocessing.hpp"
#include "netanomaly/serialization.hpp"

namespace netanomaly {

enum class AnomalyMode { kShiftedMean, kUniformBox, kFeatureSpike };

std::string anomaly_mode_name(AnomalyMode m);
AnomalyMode anomaly_mode_from(const std::string& name);

// Labeled stand-in for a flow log: a Gaussian cluster of normal records plus
// injected anomalies, interleaved in a seeded chronological order.
struct SyntheticSpec {
  std::size_t n_normal = 2000;
  std::size_t n_anomaly = 100;
  std::size_t dims = 8;
  double cluster_stddev = 1.0;
  AnomalyMode anomaly_mode = AnomalyMode::kShiftedMean;
  // Distance of anomalies from the cluster, in stddev units.
  double shift_magnitude = 6.0;
  std::uint64_t seed = 42;

  void validate() const;
  bool operator==(const SyntheticSpec&) const = default;
};

// shifted-mean: each anomaly is a cluster draw moved shift_magnitude stddevs
// along its own random direction. uniform-box: uniform in the cube of
// half-width shift_magnitude stddevs. feature-spike: a cluster draw with one
// random feature set to shift_magnitude stddevs.
Dataset synth_dataset(const SyntheticSpec& spec);

// 200 points in a tight cluster and one point at 10 sigma, seed 42.
Dataset seeded_outlier_fixture();

enum class ReportFormat { kJson, kCsv };

struct ExperimentConfig {
  // Exactly one of `synthetic` or `dataset_path` (with `schema_path`).
  std::optional<SyntheticSpec> synthetic;
  std::string dataset_path;
  std::string schema_path;

  PipelineConfig pipeline;
  double train_frac = 0.7;
  double val_frac_of_train = 0.2;
  std::uint64_t seed = 42;

  std::string output_path;   // report; empty to skip writing
  ReportFormat format = ReportFormat::kJson;
  std::string roc_csv_path;  // optional ROC curve points

  // Throws ConfigError unless exactly one dataset source is set.
  void validate() const;
};

void to_json(Json& j, const SyntheticSpec& s);
void from_json(const Json& j, SyntheticSpec& s);
void to_json(Json& j, const ExperimentConfig& c);
void from_json(const Json& j, ExperimentConfig& c);

// Defaults that finish in minutes: GAN 2,000 iterations, 20 epochs,
// windows of 32 records, on the canonical synthetic fixture.
ExperimentConfig desk_scale_config();

// Loads or synthesizes the dataset named by `config`.
Dataset load_experiment_data(const ExperimentConfig& config);

struct ExperimentResult {
  MetricsReport report;
  WindowScores test_scores;
  PipelineModel model;
};

// Split, fit, classify the test split and assemble the report for one
// prepared dataset.
ExperimentResult run_on_splits(const Splits& splits, const PipelineConfig& pipeline,
                               std::uint64_t seed, const std::string& config_json,
                               const std::string& name);

// Full experiment; writes the report (and ROC CSV) atomically when paths
// are configured.
ExperimentResult run_experiment(const ExperimentConfig& config);

// IF-GAN, IF-Transformer, GAN-Transformer and Integration Model over the same
// splits and seed. Writes a combined document when output_path is set.
std::vector<MetricsReport> run_ablation(const ExperimentConfig& config);

std::string report_csv(const std::vector<MetricsReport>& reports);
std::string roc_csv(const std::vector<double>& scores,
                    const std::vector<int>& labels);
// Zeroes the wall-clock fields so reports can be compared across runs.
MetricsReport without_timings(MetricsReport report);

std::string environment_note();

}  // namespace netanomaly

#endif  // NETANOMALY_EXPERIMENT_HPP_
