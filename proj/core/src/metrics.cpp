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

#include "netanomaly/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "netanomaly/error.hpp"

namespace netanomaly {
namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

ConfusionCounts confusion(std::span<const int> predictions,
                          std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw InputError("confusion: " + std::to_string(predictions.size()) +
                     " predictions for " + std::to_string(labels.size()) +
                     " labels");
  }
  if (labels.empty()) throw InputError("confusion: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = predictions[i] != 0;
    const bool truth = labels[i] != 0;
    if (pred && truth) ++c.tp;
    else if (!pred && !truth) ++c.tn;
    else if (pred) ++c.fp;
    else ++c.fn;
  }
  return c;
}

ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw InputError("classification_metrics: no points");
  ClassificationMetrics m;
  const auto d = [](std::size_t v) { return static_cast<double>(v); };
  m.accuracy = d(c.tp + c.tn) / d(c.total());
  m.precision = c.tp + c.fp == 0 ? 0.0 : d(c.tp) / d(c.tp + c.fp);
  m.recall = c.tp + c.fn == 0 ? 0.0 : d(c.tp) / d(c.tp + c.fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InputError("roc_curve: " + std::to_string(scores.size()) +
                     " scores for " + std::to_string(labels.size()) + " labels");
  }
  std::size_t positives = 0;
  for (int l : labels) positives += l != 0;
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("ROC needs both classes (" +
                               std::to_string(positives) + " positive, " +
                               std::to_string(negatives) + " negative)");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> curve;
  curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]] != 0) ++tp;
      else ++fp;
      ++i;
    }
    curve.push_back({s, static_cast<double>(fp) / static_cast<double>(negatives),
                     static_cast<double>(tp) / static_cast<double>(positives)});
  }
  return curve;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const auto curve = roc_curve(scores, labels);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) *
            (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

std::uint64_t dense_parameter_count(std::span<const std::size_t> widths) {
  std::uint64_t n = 0;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k)
    n += widths[k] * widths[k + 1] + widths[k + 1];
  return n;
}

ResourceProfile resource_profile(std::uint64_t parameter_count,
                                 std::uint64_t flop_count,
                                 double inference_time_ms,
                                 double training_time_s) {
  ResourceProfile p;
  p.parameter_count = parameter_count;
  p.flop_count = flop_count;
  p.parameters_m = static_cast<double>(parameter_count) / 1e6;
  p.flops_g = static_cast<double>(flop_count) / 1e9;
  p.inference_time_ms = inference_time_ms;
  p.training_time_s = training_time_s;
  return p;
}

void fill_rates(MetricsReport& report) {
  const ClassificationMetrics m = classification_metrics(report.counts);
  report.accuracy = m.accuracy;
  report.precision = m.precision;
  report.recall = m.recall;
  report.f1 = m.f1;
}

std::string format_summary_table(std::span<const MetricsReport> reports) {
  std::ostringstream out;
  out << pad("Method", 20) << pad("Accuracy", 10) << pad("Recall", 10)
      << pad("F1 Score", 10) << "AUC\n";
  for (const auto& r : reports) {
    out << pad(r.name, 20) << pad(percent(r.accuracy), 10)
        << pad(percent(r.recall), 10) << pad(percent(r.f1), 10)
        << percent(r.auc) << '\n';
  }
  return out.str();
}

std::string format_ablation_table(std::span<const MetricsReport> reports) {
  std::ostringstream out;
  out << pad("Model", 20) << pad("Accuracy", 10) << pad("Recall", 10)
      << pad("Precision", 11) << pad("F1 Score", 10) << pad("AUC", 8)
      << pad("Training Time", 15) << pad("Inference Time", 16)
      << "Parameters\n";
  for (const auto& r : reports) {
    out << pad(r.name, 20) << pad(percent(r.accuracy), 10)
        << pad(percent(r.recall), 10) << pad(percent(r.precision), 11)
        << pad(percent(r.f1), 10) << pad(percent(r.auc), 8)
        << pad(fixed(r.resources.training_time_s, 2), 15)
        << pad(fixed(r.resources.inference_time_ms, 3), 16)
        << fixed(r.resources.parameters_m, 4) << '\n';
  }
  return out.str();
}

}  // namespace netanomaly
