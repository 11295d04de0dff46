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

#include "netanomaly/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "netanomaly/error.hpp"
#include "netanomaly/random.hpp"

namespace netanomaly {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> random_unit(std::size_t dims, Rng& rng) {
  std::vector<double> v(dims);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::string format_format(ReportFormat f) {
  return f == ReportFormat::kCsv ? "csv" : "json";
}

template <typename Fn>
auto tagged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

std::string num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

std::string anomaly_mode_name(AnomalyMode m) {
  switch (m) {
    case AnomalyMode::kShiftedMean:
      return "shifted-mean";
    case AnomalyMode::kUniformBox:
      return "uniform-box";
    case AnomalyMode::kFeatureSpike:
      return "feature-spike";
  }
  return "shifted-mean";
}

AnomalyMode anomaly_mode_from(const std::string& name) {
  if (name == "shifted-mean") return AnomalyMode::kShiftedMean;
  if (name == "uniform-box") return AnomalyMode::kUniformBox;
  if (name == "feature-spike") return AnomalyMode::kFeatureSpike;
  throw ConfigError("unknown anomaly mode '" + name + "'");
}

void SyntheticSpec::validate() const {
  if (dims == 0) throw ConfigError("synthetic: dims must be at least 1");
  if (n_normal + n_anomaly == 0) throw ConfigError("synthetic: no records");
  if (!(cluster_stddev > 0.0)) throw ConfigError("synthetic: stddev must be positive");
}

Dataset synth_dataset(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double sd = spec.cluster_stddev;
  std::vector<Record> records;
  records.reserve(spec.n_normal + spec.n_anomaly);
  for (std::size_t i = 0; i < spec.n_normal; ++i) {
    Record r;
    r.features.resize(spec.dims);
    for (double& x : r.features) x = sd * rng.normal();
    records.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < spec.n_anomaly; ++i) {
    Record r;
    r.label = 1;
    r.features.resize(spec.dims);
    switch (spec.anomaly_mode) {
      case AnomalyMode::kShiftedMean: {
        const auto dir = random_unit(spec.dims, rng);
        for (std::size_t j = 0; j < spec.dims; ++j)
          r.features[j] = sd * (rng.normal() + spec.shift_magnitude * dir[j]);
        break;
      }
      case AnomalyMode::kUniformBox:
        for (double& x : r.features)
          x = sd * rng.uniform(-spec.shift_magnitude, spec.shift_magnitude);
        break;
      case AnomalyMode::kFeatureSpike: {
        for (double& x : r.features) x = sd * rng.normal();
        r.features[rng.below(spec.dims)] = sd * spec.shift_magnitude;
        break;
      }
    }
    records.push_back(std::move(r));
  }
  rng.shuffle(records);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].row_index = i;

  Dataset ds;
  ds.records = std::move(records);
  for (std::size_t j = 0; j < spec.dims; ++j)
    ds.feature_names.push_back("f" + std::to_string(j));
  ds.provenance = "synthetic " + anomaly_mode_name(spec.anomaly_mode) + " n_normal=" +
                  std::to_string(spec.n_normal) + " n_anomaly=" +
                  std::to_string(spec.n_anomaly) + " seed=" +
                  std::to_string(spec.seed);
  return ds;
}

Dataset seeded_outlier_fixture() {
  Rng rng(42);
  constexpr double kSigma = 0.1;
  Dataset ds;
  ds.feature_names = {"x", "y"};
  ds.provenance = "outlier fixture seed=42";
  for (std::size_t i = 0; i < 200; ++i) {
    ds.records.push_back(
        Record{{kSigma * rng.normal(), kSigma * rng.normal()}, {}, 0, i});
  }
  ds.records.push_back(Record{{10.0 * kSigma, 0.0}, {}, 1, 200});
  return ds;
}

void ExperimentConfig::validate() const {
  const bool has_file = !dataset_path.empty();
  if (has_file == synthetic.has_value()) {
    throw ConfigError(
        "experiment needs exactly one dataset source (synthetic spec or file)");
  }
  if (has_file && schema_path.empty()) {
    throw ConfigError("a dataset file needs a schema");
  }
  pipeline.validate();
}

void to_json(Json& j, const SyntheticSpec& s) {
  j = Json{{"n_normal", s.n_normal},
           {"n_anomaly", s.n_anomaly},
           {"dims", s.dims},
           {"cluster_stddev", s.cluster_stddev},
           {"anomaly_mode", anomaly_mode_name(s.anomaly_mode)},
           {"shift_magnitude", s.shift_magnitude},
           {"seed", s.seed}};
}

void from_json(const Json& j, SyntheticSpec& s) {
  s.n_normal = j.value("n_normal", s.n_normal);
  s.n_anomaly = j.value("n_anomaly", s.n_anomaly);
  s.dims = j.value("dims", s.dims);
  s.cluster_stddev = j.value("cluster_stddev", s.cluster_stddev);
  if (j.contains("anomaly_mode"))
    s.anomaly_mode = anomaly_mode_from(j.at("anomaly_mode").get<std::string>());
  s.shift_magnitude = j.value("shift_magnitude", s.shift_magnitude);
  s.seed = j.value("seed", s.seed);
}

void to_json(Json& j, const ExperimentConfig& c) {
  Json dataset = Json::object();
  if (c.synthetic) {
    dataset["synthetic"] = *c.synthetic;
  } else {
    dataset["path"] = c.dataset_path;
    dataset["schema"] = c.schema_path;
  }
  PipelineConfig pipeline = c.pipeline;
  pipeline.seed = c.seed;
  j = Json{{"dataset", dataset},
           {"pipeline", pipeline},
           {"train_frac", c.train_frac},
           {"val_frac_of_train", c.val_frac_of_train},
           {"seed", c.seed},
           {"output",
            {{"path", c.output_path},
             {"format", format_format(c.format)},
             {"roc_csv", c.roc_csv_path}}}};
}

void from_json(const Json& j, ExperimentConfig& c) {
  if (j.contains("dataset")) {
    const Json& d = j.at("dataset");
    if (d.contains("synthetic")) {
      SyntheticSpec spec;
      d.at("synthetic").get_to(spec);
      c.synthetic = spec;
    }
    c.dataset_path = d.value("path", c.dataset_path);
    c.schema_path = d.value("schema", c.schema_path);
  }
  if (j.contains("pipeline")) j.at("pipeline").get_to(c.pipeline);
  c.train_frac = j.value("train_frac", c.train_frac);
  c.val_frac_of_train = j.value("val_frac_of_train", c.val_frac_of_train);
  c.seed = j.value("seed", c.seed);
  c.pipeline.seed = c.seed;
  if (j.contains("output")) {
    const Json& o = j.at("output");
    c.output_path = o.value("path", c.output_path);
    const std::string fmt = o.value("format", format_format(c.format));
    if (fmt != "json" && fmt != "csv")
      throw ConfigError("report format must be json or csv");
    c.format = fmt == "csv" ? ReportFormat::kCsv : ReportFormat::kJson;
    c.roc_csv_path = o.value("roc_csv", c.roc_csv_path);
  }
}

ExperimentConfig desk_scale_config() {
  ExperimentConfig c;
  c.synthetic = SyntheticSpec{};
  c.seed = 42;
  c.pipeline.seed = 42;
  c.pipeline.gan.iterations = 2000;
  c.pipeline.transformer.epochs = 20;
  c.pipeline.transformer.seq_len = 32;
  return c;
}

Dataset load_experiment_data(const ExperimentConfig& config) {
  if (config.synthetic) return synth_dataset(*config.synthetic);
  const DatasetSchema schema = load_schema(config.schema_path);
  std::ifstream in(config.dataset_path);
  if (!in) throw InputError("cannot open dataset " + config.dataset_path);
  return parse_dataset(in, schema).dataset;
}

std::string environment_note() {
  std::ostringstream ss;
#if defined(__clang__)
  ss << "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  ss << "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
  ss << "unknown compiler";
#endif
  ss << "; hardware threads " << std::thread::hardware_concurrency()
     << "; timings are wall-clock and machine dependent";
  return ss.str();
}

ExperimentResult run_on_splits(const Splits& splits, const PipelineConfig& pipeline,
                               std::uint64_t seed, const std::string& config_json,
                               const std::string& name) {
  PipelineConfig cfg = pipeline;
  cfg.seed = seed;

  const auto fit_start = Clock::now();
  PipelineModel model = fit_pipeline(splits.train, splits.val, cfg);
  const double training_time_s = seconds_since(fit_start);

  const auto infer_start = Clock::now();
  WindowScores scores = tagged("classify", [&] { return classify(model, splits.test); });
  const double inference_s = seconds_since(infer_start);

  MetricsReport report;
  report.name = name;
  report.seed = seed;
  report.threshold = model.threshold;
  report.environment = environment_note();
  report.config_json = config_json;
  tagged("evaluate", [&] {
    report.counts = confusion(scores.decisions, scores.labels);
    fill_rates(report);
    report.auc = roc_auc(scores.fused, scores.labels);
    if (!scores.forest_mean.empty())
      report.forest_auc = roc_auc(scores.forest_mean, scores.labels);
  });
  const double per_window_ms =
      1000.0 * inference_s / static_cast<double>(std::max<std::size_t>(1, scores.fused.size()));
  report.resources = resource_profile(model.parameter_count(), model.window_flops(),
                                      per_window_ms, training_time_s);
  return ExperimentResult{std::move(report), std::move(scores), std::move(model)};
}

namespace {

Splits prepare_splits(const ExperimentConfig& config) {
  const Dataset data = tagged("load", [&] { return load_experiment_data(config); });
  return tagged("split", [&] {
    return split_dataset(data, config.train_frac, config.val_frac_of_train,
                         split_seed(config.seed, 0));
  });
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Splits splits = prepare_splits(config);
  const std::string config_json = Json(config).dump();
  ExperimentResult result = run_on_splits(splits, config.pipeline, config.seed,
                                          config_json,
                                          variant_name(config.pipeline.fusion.variant));
  if (!config.output_path.empty()) {
    write_file_atomically(config.output_path,
                          config.format == ReportFormat::kCsv
                              ? report_csv({result.report})
                              : report_to_string(result.report) + "\n");
  }
  if (!config.roc_csv_path.empty()) {
    write_file_atomically(config.roc_csv_path,
                          roc_csv(result.test_scores.fused, result.test_scores.labels));
  }
  return result;
}

std::vector<MetricsReport> run_ablation(const ExperimentConfig& config) {
  config.validate();
  const Splits splits = prepare_splits(config);
  std::vector<MetricsReport> reports;
  for (Variant v : {Variant::kIfGan, Variant::kIfTransformer,
                    Variant::kGanTransformer, Variant::kIntegration}) {
    ExperimentConfig variant_config = config;
    variant_config.pipeline.fusion.variant = v;
    if (v == Variant::kIfTransformer) variant_config.pipeline.augment_ratio = 0.0;
    reports.push_back(run_on_splits(splits, variant_config.pipeline, config.seed,
                                    Json(variant_config).dump(), variant_name(v))
                          .report);
  }
  if (!config.output_path.empty()) {
    if (config.format == ReportFormat::kCsv) {
      write_file_atomically(config.output_path, report_csv(reports));
    } else {
      Json doc = make_envelope(
          "ablation", Json{{"reports", reports},
                           {"table", format_ablation_table(reports)}});
      write_file_atomically(config.output_path, doc.dump(2) + "\n");
    }
  }
  return reports;
}

std::string report_csv(const std::vector<MetricsReport>& reports) {
  std::ostringstream out;
  out << "name,accuracy,recall,precision,f1_score,auc,forest_auc,threshold,tp,tn,fp,"
         "fn,parameters_m,flops_g,inference_time_ms,training_time_s,seed\n";
  for (const auto& r : reports) {
    out << r.name << ',' << num(r.accuracy) << ',' << num(r.recall) << ','
        << num(r.precision) << ',' << num(r.f1) << ',' << num(r.auc) << ','
        << (r.forest_auc ? num(*r.forest_auc) : std::string()) << ','
        << num(r.threshold) << ',' << r.counts.tp << ',' << r.counts.tn << ','
        << r.counts.fp << ',' << r.counts.fn << ',' << num(r.resources.parameters_m)
        << ',' << num(r.resources.flops_g) << ','
        << num(r.resources.inference_time_ms) << ','
        << num(r.resources.training_time_s) << ',' << r.seed << '\n';
  }
  return out.str();
}

std::string roc_csv(const std::vector<double>& scores,
                    const std::vector<int>& labels) {
  std::ostringstream out;
  out << "threshold,fpr,tpr\n";
  for (const auto& p : roc_curve(scores, labels))
    out << num(p.threshold) << ',' << num(p.fpr) << ',' << num(p.tpr) << '\n';
  return out.str();
}

MetricsReport without_timings(MetricsReport report) {
  report.resources.inference_time_ms = 0.0;
  report.resources.training_time_s = 0.0;
  return report;
}

}  // namespace netanomaly
