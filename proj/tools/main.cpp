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

// Command-line front end: synth, preprocess, train, score, eval, ablate.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netanomaly/error.hpp"
#include "netanomaly/experiment.hpp"
#include "netanomaly/metrics.hpp"
#include "netanomaly/pipeline.hpp"
#include "netanomaly/preprocessing.hpp"
#include "netanomaly/serialization.hpp"

namespace na = netanomaly;

namespace {

// Flags shared by the subcommands that build an experiment configuration.
struct ExperimentFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string dataset;
  std::string schema;
  bool desk = false;
  std::optional<std::size_t> trees, max_depth, seq_len, heads, gan_iters, epochs;
  std::optional<double> alpha;
  std::string variant;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--dataset", dataset, "CSV log file (default: synthetic fixture)");
    app.add_option("--schema", schema, "Schema JSON for --dataset");
    app.add_flag("--desk", desk,
                 "Desk-scale defaults: 2000 GAN iterations, 20 epochs, windows of 32");
    app.add_option("--trees", trees, "Isolation trees");
    app.add_option("--max-depth", max_depth, "Isolation tree depth limit");
    app.add_option("--seq-len", seq_len, "Records per window");
    app.add_option("--heads", heads, "Attention heads");
    app.add_option("--gan-iters", gan_iters, "GAN training iterations");
    app.add_option("--epochs", epochs, "Transformer epochs");
    app.add_option("--alpha", alpha, "Weight of the forest score in the fused score")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--variant", variant,
                   "integration | if-gan | if-transformer | gan-transformer");
  }

  na::ExperimentConfig resolve() const {
    na::ExperimentConfig c;
    if (!config_path.empty()) {
      c = na::Json::parse(na::read_file(config_path)).get<na::ExperimentConfig>();
    } else if (desk) {
      c = na::desk_scale_config();
    } else {
      c.synthetic = na::SyntheticSpec{};
    }
    if (desk && !config_path.empty()) {
      const na::ExperimentConfig d = na::desk_scale_config();
      c.pipeline.gan.iterations = d.pipeline.gan.iterations;
      c.pipeline.transformer.epochs = d.pipeline.transformer.epochs;
      c.pipeline.transformer.seq_len = d.pipeline.transformer.seq_len;
    }
    if (!dataset.empty()) {
      c.synthetic.reset();
      c.dataset_path = dataset;
      c.schema_path = schema;
      if (schema.empty()) throw na::ConfigError("--dataset needs --schema");
    }
    if (seed) {
      c.seed = *seed;
      if (c.synthetic && config_path.empty()) c.synthetic->seed = *seed;
    }
    c.pipeline.seed = c.seed;
    auto& p = c.pipeline;
    if (trees) p.forest.num_trees = *trees;
    if (max_depth) p.forest.max_depth = *max_depth;
    if (seq_len) p.transformer.seq_len = *seq_len;
    if (heads) p.transformer.num_heads = *heads;
    if (gan_iters) p.gan.iterations = *gan_iters;
    if (epochs) p.transformer.epochs = *epochs;
    if (alpha) p.fusion.alpha = *alpha;
    if (!variant.empty()) p.fusion.variant = na::variant_from_key(variant);
    c.validate();
    return c;
  }
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    na::write_file_atomically(path, text);
  }
}

na::Splits experiment_splits(const na::ExperimentConfig& c) {
  na::Dataset data;
  try {
    data = na::load_experiment_data(c);
  } catch (const na::StageError&) {
    throw;
  } catch (const na::Error& e) {
    throw na::StageError("load", e);
  }
  try {
    return na::split_dataset(data, c.train_frac, c.val_frac_of_train, na::split_seed(c.seed, 0));
  } catch (const na::Error& e) {
    throw na::StageError("split", e);
  }
}

std::string histogram_csv(const na::WindowScores& scores, std::size_t bins) {
  std::vector<std::size_t> normal(bins), anomaly(bins);
  for (std::size_t i = 0; i < scores.fused.size(); ++i) {
    const double s = std::clamp(scores.fused[i], 0.0, 1.0);
    const std::size_t b = std::min(bins - 1, static_cast<std::size_t>(s * static_cast<double>(bins)));
    (scores.labels[i] != 0 ? anomaly : normal)[b]++;
  }
  std::ostringstream out;
  out << "bin_lower,bin_upper,normal,anomaly\n";
  for (std::size_t b = 0; b < bins; ++b) {
    out << static_cast<double>(b) / static_cast<double>(bins) << ','
        << static_cast<double>(b + 1) / static_cast<double>(bins) << ',' << normal[b] << ','
        << anomaly[b] << '\n';
  }
  return out.str();
}

std::string scores_csv(const na::WindowScores& s) {
  std::ostringstream out;
  out.precision(17);
  out << "window,fused,forest_mean,transformer_prob,decision,label\n";
  for (std::size_t i = 0; i < s.fused.size(); ++i) {
    out << i << ',' << s.fused[i] << ',';
    if (!s.forest_mean.empty()) out << s.forest_mean[i];
    out << ',';
    if (!s.transformer_prob.empty()) out << s.transformer_prob[i];
    out << ',' << s.decisions[i] << ',' << s.labels[i] << '\n';
  }
  return out.str();
}

void print_summary(const na::MetricsReport& r) {
  std::cerr << na::format_summary_table(std::span<const na::MetricsReport>(&r, 1));
  std::cerr << "threshold " << r.threshold << ", parameters " << r.resources.parameter_count
            << ", training " << r.resources.training_time_s << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network log anomaly detection: isolation forest, GAN augmentation and a "
               "transformer encoder"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a labeled synthetic dataset as CSV");
  na::SyntheticSpec spec;
  std::string synth_out, synth_schema_out, mode = "shifted-mean";
  synth->add_option("--normal", spec.n_normal, "Normal records");
  synth->add_option("--anomalies", spec.n_anomaly, "Anomalous records");
  synth->add_option("--dims", spec.dims, "Features per record");
  synth->add_option("--stddev", spec.cluster_stddev, "Cluster standard deviation");
  synth->add_option("--mode", mode, "shifted-mean | uniform-box | feature-spike");
  synth->add_option("--shift", spec.shift_magnitude, "Anomaly distance in stddevs");
  synth->add_option("--seed", spec.seed, "Seed");
  synth->add_option("--out", synth_out, "Output CSV (default stdout)");
  synth->add_option("--schema-out", synth_schema_out, "Also write a matching schema");

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "Parse and clean a CSV against a schema");
  std::string prep_dataset, prep_schema, prep_out;
  prep->add_option("--dataset", prep_dataset, "Input CSV")->required()->check(CLI::ExistingFile);
  prep->add_option("--schema", prep_schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  prep->add_option("--out", prep_out, "Cleaned canonical CSV (default stdout)");

  // train
  auto* train = app.add_subcommand("train", "Fit the pipeline and save the model");
  ExperimentFlags train_flags;
  std::string train_out;
  train_flags.attach(*train);
  train->add_option("--out", train_out, "Model JSON")->required();

  // score
  auto* score = app.add_subcommand("score", "Score windows of a dataset with a saved model");
  std::string score_model, score_dataset, score_schema, score_out, score_hist;
  std::optional<double> threshold;
  score->add_option("--model", score_model, "Model JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--dataset", score_dataset, "CSV to score")->required()->check(CLI::ExistingFile);
  score->add_option("--schema", score_schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--threshold", threshold, "Override the calibrated threshold");
  score->add_option("--out", score_out, "Per-window scores CSV (default stdout)");
  score->add_option("--histogram", score_hist, "Score histogram CSV");

  // eval
  auto* eval = app.add_subcommand("eval", "Split, fit, evaluate and write a report");
  ExperimentFlags eval_flags;
  std::string eval_out, eval_format = "json", eval_roc, eval_hist;
  eval_flags.attach(*eval);
  eval->add_option("--out", eval_out, "Report path (default stdout)");
  eval->add_option("--format", eval_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  eval->add_option("--roc", eval_roc, "ROC curve CSV");
  eval->add_option("--histogram", eval_hist, "Test-score histogram CSV");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Run the four pipeline variants on one split");
  ExperimentFlags ablate_flags;
  std::string ablate_out, ablate_format = "json";
  ablate_flags.attach(*ablate);
  ablate->add_option("--out", ablate_out, "Combined report path (default: table on stdout)");
  ablate->add_option("--format", ablate_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      spec.anomaly_mode = na::anomaly_mode_from(mode);
      const na::Dataset ds = na::synth_dataset(spec);
      std::ostringstream csv;
      csv.precision(17);
      na::write_canonical_csv(csv, ds);
      write_output(synth_out, csv.str());
      if (!synth_schema_out.empty())
        na::write_file_atomically(synth_schema_out,
                                  na::Json(na::canonical_schema(ds)).dump(2) + "\n");
    } else if (*prep) {
      std::ifstream in(prep_dataset);
      const na::ParseResult parsed = na::parse_dataset(in, na::load_schema(prep_schema));
      std::ostringstream csv;
      na::write_canonical_csv(csv, parsed.dataset);
      write_output(prep_out, csv.str());
      std::cerr << na::Json(parsed.report).dump(2) << '\n';
    } else if (*train) {
      const na::ExperimentConfig c = train_flags.resolve();
      const na::Splits splits = experiment_splits(c);
      const na::PipelineModel model = na::fit_pipeline(splits.train, splits.val, c.pipeline);
      na::write_file_atomically(train_out, na::model_to_string(model) + "\n");
      for (const auto& w : model.warnings) std::cerr << "warning: " << w << '\n';
      std::cerr << "threshold " << model.threshold << ", parameters "
                << model.parameter_count() << '\n';
    } else if (*score) {
      na::PipelineModel model = na::model_from_string(na::read_file(score_model));
      if (threshold) model.threshold = *threshold;
      std::ifstream in(score_dataset);
      const na::Dataset data = na::parse_dataset(in, na::load_schema(score_schema)).dataset;
      const na::WindowScores scores = na::classify(model, data);
      write_output(score_out, scores_csv(scores));
      if (!score_hist.empty()) na::write_file_atomically(score_hist, histogram_csv(scores, 20));
    } else if (*eval) {
      na::ExperimentConfig c = eval_flags.resolve();
      c.format = eval_format == "csv" ? na::ReportFormat::kCsv : na::ReportFormat::kJson;
      c.output_path = eval_out == "-" ? "" : eval_out;
      c.roc_csv_path = eval_roc;
      const na::ExperimentResult result = na::run_experiment(c);
      if (c.output_path.empty()) {
        std::cout << (c.format == na::ReportFormat::kCsv ? na::report_csv({result.report})
                                                         : na::report_to_string(result.report) + "\n");
      }
      if (!eval_hist.empty())
        na::write_file_atomically(eval_hist, histogram_csv(result.test_scores, 20));
      for (const auto& w : result.model.warnings) std::cerr << "warning: " << w << '\n';
      print_summary(result.report);
    } else if (*ablate) {
      na::ExperimentConfig c = ablate_flags.resolve();
      c.format = ablate_format == "csv" ? na::ReportFormat::kCsv : na::ReportFormat::kJson;
      c.output_path = ablate_out == "-" ? "" : ablate_out;
      const std::vector<na::MetricsReport> reports = na::run_ablation(c);
      std::cout << na::format_ablation_table(reports);
    }
  } catch (const na::StageError& e) {
    std::cerr << "netanomaly: " << e.kind() << " error in stage " << e.what() << '\n';
    return 2;
  } catch (const na::Error& e) {
    std::cerr << "netanomaly: " << e.kind() << " error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "netanomaly: format error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "netanomaly: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
