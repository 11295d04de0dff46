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

#include "netanomaly/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netanomaly/error.hpp"
#include "netanomaly/random.hpp"

namespace netanomaly {
namespace {

// Stream indices for split_seed(config.seed, ...).
enum SeedStream : std::uint64_t {
  kForestStream = 1,
  kGanStream = 2,
  kSynthesisStream = 3,
  kTransformerStream = 4,
};

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

// Appends the forest score of each record as one more feature.
Dataset with_forest_channel(const PipelineModel& model, const Dataset& data) {
  Dataset out = data;
  out.feature_names.push_back("forest_score");
  for (auto& r : out.records) {
    r.features.push_back(model.forest_channel(anomaly_score(*model.forest, r.features)));
  }
  return out;
}

// Standardizes the forest-score channel with the scores of the real training
// records, so it enters the transformer on the same scale as the features.
void fit_forest_channel(PipelineModel& model, const Dataset& train) {
  const std::vector<double> scores =
      anomaly_scores(*model.forest, feature_matrix(train));
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  const double sd = std::sqrt(var / n);
  model.channel_center = mean;
  model.channel_scale = sd > 0.0 ? sd : 1.0;
}

std::vector<DenseArray> rows_of(const std::vector<LabeledWindow>& windows) {
  std::vector<DenseArray> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(w.rows);
  return out;
}

std::vector<int> labels_of(const std::vector<LabeledWindow>& windows) {
  std::vector<int> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(w.label);
  return out;
}

DenseArray append_forest_channel(const PipelineModel& model, const DenseArray& a,
                                 std::span<const double> scores) {
  DenseArray out(a.rows(), a.cols() + 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
    out(i, a.cols()) = model.forest_channel(scores[i]);
  }
  return out;
}

struct ComponentScores {
  double forest_mean = 0.0;
  double transformer_prob = 0.0;
};

ComponentScores score_components(const PipelineModel& model,
                                 const DenseArray& window) {
  ComponentScores out;
  std::vector<double> forest_scores;
  if (model.forest) {
    forest_scores = anomaly_scores(*model.forest, window);
    out.forest_mean =
        std::accumulate(forest_scores.begin(), forest_scores.end(), 0.0) /
        static_cast<double>(forest_scores.size());
  }
  if (model.transformer) {
    out.transformer_prob = anomaly_probability(
        *model.transformer, model.config.uses_forest_channel()
                                ? append_forest_channel(model, window, forest_scores)
                                : window);
  }
  return out;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kIntegration:
      return "Integration Model";
    case Variant::kIfGan:
      return "IF-GAN";
    case Variant::kIfTransformer:
      return "IF-Transformer";
    case Variant::kGanTransformer:
      return "GAN-Transformer";
  }
  return "unknown";
}

std::string variant_key(Variant v) {
  switch (v) {
    case Variant::kIntegration:
      return "integration";
    case Variant::kIfGan:
      return "if-gan";
    case Variant::kIfTransformer:
      return "if-transformer";
    case Variant::kGanTransformer:
      return "gan-transformer";
  }
  return "integration";
}

Variant variant_from_key(const std::string& key) {
  for (Variant v : {Variant::kIntegration, Variant::kIfGan,
                    Variant::kIfTransformer, Variant::kGanTransformer}) {
    if (variant_key(v) == key || variant_name(v) == key) return v;
  }
  throw ConfigError("unknown pipeline variant '" + key + "'");
}

void PipelineConfig::validate() const {
  if (!(fusion.alpha >= 0.0 && fusion.alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1]");
  }
  if (!(augment_ratio >= 0.0) || !std::isfinite(augment_ratio)) {
    throw ConfigError("augment_ratio must be a finite value >= 0");
  }
  if (forest.num_trees == 0) throw ConfigError("forest needs at least one tree");
  if (uses_transformer()) transformer.validate();
  if (transformer.seq_len == 0) throw ConfigError("seq_len must be positive");
}

double PipelineConfig::effective_alpha() const {
  switch (fusion.variant) {
    case Variant::kIfGan:
      return 1.0;
    case Variant::kGanTransformer:
      return 0.0;
    default:
      return fusion.alpha;
  }
}

std::vector<LabeledWindow> windowize(const Dataset& records, std::size_t seq_len,
                                     std::size_t stride) {
  if (seq_len == 0 || stride == 0) {
    throw InputError("windowize: seq_len and stride must be positive");
  }
  if (records.size() < seq_len) {
    throw InputError("windowize: " + std::to_string(records.size()) +
                     " records are fewer than seq_len " +
                     std::to_string(seq_len));
  }
  std::vector<LabeledWindow> out;
  for (std::size_t start = 0; start + seq_len <= records.size();
       start += stride) {
    LabeledWindow w{DenseArray(seq_len, records.dim()), 0,
                    records.records[start].row_index};
    for (std::size_t i = 0; i < seq_len; ++i) {
      const Record& r = records.records[start + i];
      std::copy(r.features.begin(), r.features.end(), w.rows.row(i).begin());
      if (r.label != 0) w.label = 1;
    }
    out.push_back(std::move(w));
  }
  return out;
}

double fuse(double alpha, double forest_mean, double transformer_prob) {
  return alpha * forest_mean + (1.0 - alpha) * transformer_prob;
}

double calibrate_threshold(std::span<const double> scores,
                           std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InputError("calibrate_threshold: scores and labels differ in length");
  }
  std::size_t positives = 0;
  for (int l : labels) positives += l != 0;
  if (positives == 0 || positives == labels.size()) {
    throw CalibrationError("calibrate_threshold: labels contain one class");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Sweep distinct scores from the top; after a group, everything scored at
  // or above it is flagged, which is the cut at the midpoint just below.
  double best_f1 = -1.0;
  double best_threshold = 0.0;
  bool found = false;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]] != 0) ++tp;
      else ++fp;
      ++i;
    }
    if (i == order.size()) break;
    const double next = scores[order[i]];
    const double threshold = next + (s - next) / 2.0;
    const double fn = static_cast<double>(positives - tp);
    const double f1 = 2.0 * static_cast<double>(tp) /
                      (2.0 * static_cast<double>(tp) + static_cast<double>(fp) + fn);
    // Strict comparison keeps the earlier (larger) threshold on ties.
    if (f1 > best_f1) {
      best_f1 = f1;
      best_threshold = threshold;
      found = true;
    }
  }
  if (!found) {
    throw CalibrationError("calibrate_threshold: all scores are identical");
  }
  return best_threshold;
}

double calibrate_or_fallback(std::span<const double> scores,
                             std::span<const int> labels,
                             std::vector<std::string>& warnings) {
  try {
    return calibrate_threshold(scores, labels);
  } catch (const CalibrationError& e) {
    warnings.push_back(std::string(e.what()) + "; using threshold 0.5");
    return kFallbackThreshold;
  }
}

void PipelineModel::validate() const {
  const std::size_t dim = feature_dim();
  if (!(channel_scale > 0.0) || !std::isfinite(channel_scale) ||
      !std::isfinite(channel_center)) {
    throw ShapeError("pipeline: forest channel scale must be positive and finite");
  }
  if (forest && forest->num_features() != dim) {
    throw ShapeError("pipeline: forest expects " +
                     std::to_string(forest->num_features()) +
                     " features, preprocessing yields " + std::to_string(dim));
  }
  if (gan) {
    gan->validate();
    if (gan->feature_dim() != dim) {
      throw ShapeError("pipeline: GAN generates " +
                       std::to_string(gan->feature_dim()) +
                       " features, preprocessing yields " + std::to_string(dim));
    }
  }
  if (transformer) {
    transformer->validate();
    const std::size_t expected = dim + (config.uses_forest_channel() ? 1 : 0);
    if (transformer->feature_dim != expected) {
      throw ShapeError("pipeline: transformer input width " +
                       std::to_string(transformer->feature_dim) + ", expected " +
                       std::to_string(expected));
    }
  }
}

std::uint64_t PipelineModel::parameter_count() const {
  std::uint64_t n = 0;
  if (forest) n += forest->total_nodes();
  if (gan) n += gan->parameter_count();
  if (transformer) n += transformer->parameter_count();
  return n;
}

std::uint64_t PipelineModel::window_flops() const {
  const std::size_t seq_len = config.transformer.seq_len;
  double flops = 0.0;
  if (forest) flops += forest->expected_comparisons() * static_cast<double>(seq_len);
  if (transformer) {
    FlopCounter counter;
    encoder_forward(*transformer,
                    DenseArray(seq_len, transformer->feature_dim), &counter);
    flops += static_cast<double>(counter.flops);
  }
  return static_cast<std::uint64_t>(std::llround(flops));
}

std::size_t synthetic_count(const Dataset& train, double augment_ratio) {
  return static_cast<std::size_t>(std::llround(
      augment_ratio * static_cast<double>(count_label(train, 0))));
}

Dataset augment_with_synthetic(const Dataset& train, const GanModel& gan,
                               double augment_ratio, std::uint64_t seed) {
  const DenseArray synthetic =
      generate_synthetic(gan, synthetic_count(train, augment_ratio), seed);
  Dataset out = train;
  std::size_t next_index = 0;
  for (const auto& r : train.records)
    next_index = std::max(next_index, r.row_index + 1);
  for (std::size_t i = 0; i < synthetic.rows(); ++i) {
    const auto row = synthetic.row(i);
    out.records.push_back(Record{{row.begin(), row.end()}, {}, 0, next_index + i});
  }
  return out;
}

PipelineModel fit_pipeline(const Dataset& train_raw, const Dataset& val_raw,
                           PipelineConfig config) {
  config.validate();
  config.forest.seed = split_seed(config.seed, kForestStream);
  config.gan.seed = split_seed(config.seed, kGanStream);
  config.transformer.seed = split_seed(config.seed, kTransformerStream);
  if (config.fusion.variant == Variant::kIfTransformer) config.augment_ratio = 0.0;

  PipelineModel model;
  model.config = config;

  const Dataset train_source =
      config.preprocess.outlier_filter
          ? filter_outliers(train_raw, config.preprocess.outlier_z)
          : train_raw;
  Dataset train, val;
  run_stage("preprocess", [&] {
    model.transform = fit_transform(train_source, config.preprocess);
    train = apply_transform(model.transform, train_source);
    val = apply_transform(model.transform, val_raw);
  });

  // Forest on the real training records unless the variant wants it built
  // after augmentation.
  auto build = [&](const Dataset& data) {
    ForestConfig fc = config.forest;
    fc.subsample_size = std::min(fc.subsample_size, data.size());
    model.config.forest.subsample_size = fc.subsample_size;
    model.forest = build_forest(feature_matrix(data), fc);
  };
  const bool forest_after_augment = config.fusion.variant == Variant::kIfGan;
  if (config.uses_forest() && !forest_after_augment) {
    run_stage("forest", [&] { build(train); });
  }

  Dataset augmented = train;
  if (config.uses_gan()) {
    Dataset normals = train;
    normals.records.clear();
    for (const auto& r : train.records)
      if (r.label == 0) normals.records.push_back(r);
    if (normals.records.empty()) {
      throw StageError("gan", ConfigError("no normal records to learn from"));
    }
    run_stage("gan", [&] {
      model.gan = train_gan(feature_matrix(normals), config.gan);
    });
    run_stage("augment", [&] {
      augmented = augment_with_synthetic(train, *model.gan, config.augment_ratio,
                                         split_seed(config.seed, kSynthesisStream));
    });
    model.synthetic_records = augmented.size() - train.size();
  }
  if (config.uses_forest() && forest_after_augment) {
    run_stage("forest", [&] { build(augmented); });
  }

  if (config.uses_transformer()) {
    run_stage("transformer", [&] {
      if (config.uses_forest_channel()) fit_forest_channel(model, train);
      const Dataset seq_train = config.uses_forest_channel()
                                    ? with_forest_channel(model, augmented)
                                    : augmented;
      const Dataset seq_val = config.uses_forest_channel()
                                  ? with_forest_channel(model, val)
                                  : val;
      const std::size_t seq_len = config.transformer.seq_len;
      const auto train_windows =
          windowize(seq_train, seq_len, config.effective_train_stride());
      const std::vector<LabeledWindow> val_windows =
          seq_val.size() >= seq_len
              ? windowize(seq_val, seq_len, config.effective_stride())
              : std::vector<LabeledWindow>{};
      const TransformerModel init =
          init_transformer(seq_train.dim(), config.transformer);
      TrainingResult trained =
          train_classifier(init, rows_of(train_windows), labels_of(train_windows),
                           rows_of(val_windows), labels_of(val_windows));
      model.transformer = std::move(trained.model);
      for (auto& w : trained.warnings) model.warnings.push_back("transformer: " + w);
    });
  }

  run_stage("calibrate", [&] {
    if (val.size() < config.transformer.seq_len) {
      model.warnings.push_back("validation split shorter than one window; using threshold 0.5");
      model.threshold = kFallbackThreshold;
      return;
    }
    const WindowScores scores = score_transformed(model, val);
    model.threshold =
        calibrate_or_fallback(scores.fused, scores.labels, model.warnings);
  });
  model.validate();
  return model;
}

double fused_score(const PipelineModel& model, const DenseArray& window) {
  if (window.rows() != model.config.transformer.seq_len ||
      window.cols() != model.feature_dim()) {
    throw InputError("fused_score: window " + window.shape_string() +
                     " but model expects (" +
                     std::to_string(model.config.transformer.seq_len) + "x" +
                     std::to_string(model.feature_dim()) + ")");
  }
  const ComponentScores c = score_components(model, window);
  return fuse(model.config.effective_alpha(), c.forest_mean, c.transformer_prob);
}

WindowScores score_transformed(const PipelineModel& model,
                               const Dataset& transformed) {
  if (transformed.dim() != model.feature_dim()) {
    throw InputError("score: dataset has " + std::to_string(transformed.dim()) +
                     " features, model expects " +
                     std::to_string(model.feature_dim()));
  }
  const auto windows = windowize(transformed, model.config.transformer.seq_len,
                                 model.config.effective_stride());
  const double alpha = model.config.effective_alpha();
  WindowScores out;
  for (const auto& w : windows) {
    const ComponentScores c = score_components(model, w.rows);
    const double fused = fuse(alpha, c.forest_mean, c.transformer_prob);
    out.fused.push_back(fused);
    if (model.forest) out.forest_mean.push_back(c.forest_mean);
    if (model.transformer) out.transformer_prob.push_back(c.transformer_prob);
    out.labels.push_back(w.label);
    out.decisions.push_back(fused > model.threshold ? 1 : 0);
  }
  return out;
}

WindowScores classify(const PipelineModel& model, const Dataset& raw) {
  return score_transformed(model, apply_transform(model.transform, raw));
}

}  // namespace netanomaly
