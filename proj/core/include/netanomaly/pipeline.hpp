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

#ifndef NETANOMALY_PIPELINE_HPP_
#define NETANOMALY_PIPELINE_HPP_

#include <cstddef>
#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netanomaly/gan.hpp"
#include "netanomaly/isolation_forest.hpp"
#include "netanomaly/preprocessing.hpp"
#include "netanomaly/tensor.hpp"
#include "netanomaly/transformer.hpp"

namespace netanomaly {

// Which stages take part in a fitted pipeline.
enum class Variant {
  kIntegration,     // forest + GAN augmentation + transformer, blended
  kIfGan,           // forest on GAN-augmented data, no transformer
  kIfTransformer,   // forest + transformer, no augmentation
  kGanTransformer,  // GAN augmentation + transformer, no forest
};

// Display name used in report rows, e.g. "IF-GAN".
std::string variant_name(Variant v);
// Lower-case key used in configs, e.g. "if-gan".
std::string variant_key(Variant v);
// Accepts a key or a display name. Throws ConfigError otherwise.
Variant variant_from_key(const std::string& key);

struct FusionConfig {
  // Weight of the mean window forest score; 1 - alpha goes to the
  // transformer's anomaly probability.
  double alpha = 0.5;
  Variant variant = Variant::kIntegration;

  bool operator==(const FusionConfig&) const = default;
};

struct PipelineConfig {
  ForestConfig forest;
  GanConfig gan;
  // Synthetic normal records per real normal training record.
  double augment_ratio = 0.5;
  TransformerConfig transformer;
  // Window stride; 0 means seq_len (non-overlapping).
  std::size_t stride = 0;
  // Stride of the transformer's training windows; 0 means seq_len / 16.
  std::size_t train_stride = 0;
  FusionConfig fusion;
  PreprocessOptions preprocess;
  std::uint64_t seed = 42;

  // Throws ConfigError on out-of-range values.
  void validate() const;
  std::size_t effective_stride() const {
    return stride == 0 ? transformer.seq_len : stride;
  }
  std::size_t effective_train_stride() const {
    return train_stride == 0 ? std::max<std::size_t>(1, transformer.seq_len / 16)
                             : train_stride;
  }
  bool uses_forest() const { return fusion.variant != Variant::kGanTransformer; }
  bool uses_transformer() const { return fusion.variant != Variant::kIfGan; }
  bool uses_gan() const {
    return fusion.variant != Variant::kIfTransformer && augment_ratio > 0.0;
  }
  bool uses_forest_channel() const { return uses_forest() && uses_transformer(); }
  // Blend weight actually applied for this variant.
  double effective_alpha() const;

  bool operator==(const PipelineConfig&) const = default;
};

struct LabeledWindow {
  DenseArray rows;  // seq_len x dim
  int label = 0;    // 1 if any member record is an anomaly
  std::size_t first_row_index = 0;
};

// Sliding windows over records in row-index order; the ragged tail is
// dropped. Throws InputError if fewer than seq_len records.
std::vector<LabeledWindow> windowize(const Dataset& records, std::size_t seq_len,
                                     std::size_t stride);

// alpha * forest_mean + (1 - alpha) * transformer_prob.
double fuse(double alpha, double forest_mean, double transformer_prob);

// F1-maximizing cutoff over midpoints between adjacent distinct scores; ties
// go to the larger threshold. A point is flagged when score > threshold.
// Throws CalibrationError for single-class labels or a single distinct score.
double calibrate_threshold(std::span<const double> scores,
                           std::span<const int> labels);

inline constexpr double kFallbackThreshold = 0.5;

// calibrate_threshold, or kFallbackThreshold with a warning appended.
double calibrate_or_fallback(std::span<const double> scores,
                             std::span<const int> labels,
                             std::vector<std::string>& warnings);

struct PipelineModel {
  PipelineConfig config;  // resolved: stage seeds filled in
  FeatureTransform transform;
  std::optional<IsoForest> forest;
  std::optional<GanModel> gan;
  std::optional<TransformerModel> transformer;
  double threshold = kFallbackThreshold;
  // Forest scores enter the transformer as (score - center) / scale.
  double channel_center = 0.0;
  double channel_scale = 1.0;
  std::size_t synthetic_records = 0;
  std::vector<std::string> warnings;

  std::size_t feature_dim() const { return transform.output_dim(); }
  double forest_channel(double score) const {
    return (score - channel_center) / channel_scale;
  }
  // Checks that stage dimensions chain. Throws ShapeError.
  void validate() const;
  std::uint64_t parameter_count() const;
  // Analytic FLOPs to score one window.
  std::uint64_t window_flops() const;

  bool operator==(const PipelineModel&) const = default;
};

// round(augment_ratio * normal records in `train`).
std::size_t synthetic_count(const Dataset& train, double augment_ratio);

// `train` followed by synthetic_count generated records, all labeled normal,
// with row indices continuing past the largest real one.
Dataset augment_with_synthetic(const Dataset& train, const GanModel& gan,
                               double augment_ratio, std::uint64_t seed);

// Fits transforms on `train`, then forest, GAN augmentation, the forest
// score channel, the transformer, and the threshold on `val`. Errors carry
// the failing stage in StageError.
PipelineModel fit_pipeline(const Dataset& train, const Dataset& val,
                           PipelineConfig config);

struct WindowScores {
  std::vector<double> fused;
  std::vector<double> forest_mean;       // empty without a forest
  std::vector<double> transformer_prob;  // empty without a transformer
  std::vector<int> labels;
  std::vector<int> decisions;
};

// Fused score of one window of transformed records (seq_len x dim).
double fused_score(const PipelineModel& model, const DenseArray& window);

// Scores windows of already-transformed records.
WindowScores score_transformed(const PipelineModel& model,
                               const Dataset& transformed);

// Applies the stored transforms to `raw`, windowizes, scores, thresholds.
WindowScores classify(const PipelineModel& model, const Dataset& raw);

}  // namespace netanomaly

#endif  // NETANOMALY_PIPELINE_HPP_
