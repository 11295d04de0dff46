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

#include "netanomaly/serialization.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "netanomaly/error.hpp"

namespace netanomaly {
namespace {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "identity") return Activation::kIdentity;
  throw FormatError("unknown activation '" + s + "'");
}

std::string kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::kNumeric:
      return "numeric";
    case ColumnKind::kCategorical:
      return "categorical";
    case ColumnKind::kLabel:
      return "label";
  }
  return "numeric";
}

ColumnKind kind_from(const std::string& s) {
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "label") return ColumnKind::kLabel;
  throw FormatError("unknown column kind '" + s + "'");
}

std::string normalization_name(NormalizationMode m) {
  return m == NormalizationMode::kMinMax ? "minmax" : "zscore";
}

NormalizationMode normalization_from(const std::string& s) {
  if (s == "minmax") return NormalizationMode::kMinMax;
  if (s == "zscore") return NormalizationMode::kZScore;
  throw FormatError("unknown normalization '" + s + "'");
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) j.at(key).get_to(out);
}

// Wraps nlohmann parse/type errors in FormatError.
template <typename Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

void to_json(Json& j, const DenseArray& a) {
  j = Json{{"rows", a.rows()}, {"cols", a.cols()}, {"data", a.data()}};
}

void from_json(const Json& j, DenseArray& a) {
  a = DenseArray(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                 j.at("data").get<std::vector<double>>());
}

void to_json(Json& j, const ForestConfig& c) {
  j = Json{{"num_trees", c.num_trees},
           {"subsample_size", c.subsample_size},
           {"max_depth", c.max_depth},
           {"seed", c.seed}};
}

void from_json(const Json& j, ForestConfig& c) {
  read_opt(j, "num_trees", c.num_trees);
  read_opt(j, "subsample_size", c.subsample_size);
  read_opt(j, "max_depth", c.max_depth);
  read_opt(j, "seed", c.seed);
}

void to_json(Json& j, const IsoForest& f) {
  Json trees = Json::array();
  for (const auto& t : f.trees()) {
    // Columnar node layout keeps forest documents compact.
    Json feature = Json::array(), split = Json::array(), left = Json::array(),
         right = Json::array(), size = Json::array();
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      split.push_back(n.split_value);
      left.push_back(n.left);
      right.push_back(n.right);
      size.push_back(n.size);
    }
    trees.push_back(Json{{"feature", feature},
                         {"split_value", split},
                         {"left", left},
                         {"right", right},
                         {"size", size}});
  }
  j = Json{{"config", f.config()},
           {"num_features", f.num_features()},
           {"c_norm", f.c_norm()},
           {"trees", trees}};
}

void from_json(const Json& j, IsoForest& f) {
  std::vector<IsoTree> trees;
  for (const auto& jt : j.at("trees")) {
    const auto feature = jt.at("feature").get<std::vector<std::int32_t>>();
    const auto split = jt.at("split_value").get<std::vector<double>>();
    const auto left = jt.at("left").get<std::vector<std::int32_t>>();
    const auto right = jt.at("right").get<std::vector<std::int32_t>>();
    const auto size = jt.at("size").get<std::vector<std::size_t>>();
    const std::size_t n = feature.size();
    if (split.size() != n || left.size() != n || right.size() != n ||
        size.size() != n) {
      throw FormatError("forest: ragged node columns");
    }
    IsoTree tree;
    for (std::size_t i = 0; i < n; ++i) {
      const bool internal = feature[i] >= 0;
      if (internal && (left[i] < 0 || right[i] < 0 ||
                       static_cast<std::size_t>(left[i]) >= n ||
                       static_cast<std::size_t>(right[i]) >= n)) {
        throw FormatError("forest: child index out of range");
      }
      tree.nodes.push_back({feature[i], split[i], left[i], right[i], size[i]});
    }
    trees.push_back(std::move(tree));
  }
  f = IsoForest(std::move(trees), j.at("num_features").get<std::size_t>(),
                j.at("config").get<ForestConfig>());
}

void to_json(Json& j, const MlpParams& p) {
  j = Json::array();
  for (const auto& l : p.layers) {
    j.push_back(Json{{"weights", l.weights},
                     {"bias", l.bias},
                     {"activation", activation_name(l.activation)}});
  }
}

void from_json(const Json& j, MlpParams& p) {
  p.layers.clear();
  for (const auto& jl : j) {
    p.layers.push_back({jl.at("weights").get<DenseArray>(),
                        jl.at("bias").get<DenseArray>(),
                        activation_from(jl.at("activation").get<std::string>())});
  }
  p.validate();
}

void to_json(Json& j, const GanConfig& c) {
  j = Json{{"noise_dim", c.noise_dim},
           {"iterations", c.iterations},
           {"learning_rate", c.learning_rate},
           {"batch_size", c.batch_size},
           {"hidden_width", c.hidden_width},
           {"seed", c.seed}};
}

void from_json(const Json& j, GanConfig& c) {
  read_opt(j, "noise_dim", c.noise_dim);
  read_opt(j, "iterations", c.iterations);
  read_opt(j, "learning_rate", c.learning_rate);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "hidden_width", c.hidden_width);
  read_opt(j, "seed", c.seed);
}

void to_json(Json& j, const GanModel& m) {
  j = Json{{"generator", m.generator},
           {"discriminator", m.discriminator},
           {"noise_dim", m.noise_dim},
           {"iterations_trained", m.iterations_trained},
           {"rng_seed", m.rng_seed}};
}

void from_json(const Json& j, GanModel& m) {
  m.generator = j.at("generator").get<MlpParams>();
  m.discriminator = j.at("discriminator").get<MlpParams>();
  m.noise_dim = j.at("noise_dim").get<std::size_t>();
  m.iterations_trained = j.at("iterations_trained").get<std::size_t>();
  m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  m.validate();
}

void to_json(Json& j, const TransformerConfig& c) {
  j = Json{{"d_model", c.d_model},
           {"num_heads", c.num_heads},
           {"num_blocks", c.num_blocks},
           {"d_ff", c.d_ff},
           {"seq_len", c.seq_len},
           {"positional_encoding", c.positional_encoding},
           {"epochs", c.epochs},
           {"learning_rate", c.learning_rate},
           {"patience", c.patience},
           {"batch_size", c.batch_size},
           {"seed", c.seed}};
}

void from_json(const Json& j, TransformerConfig& c) {
  read_opt(j, "d_model", c.d_model);
  read_opt(j, "num_heads", c.num_heads);
  read_opt(j, "num_blocks", c.num_blocks);
  read_opt(j, "d_ff", c.d_ff);
  read_opt(j, "seq_len", c.seq_len);
  read_opt(j, "positional_encoding", c.positional_encoding);
  read_opt(j, "epochs", c.epochs);
  read_opt(j, "learning_rate", c.learning_rate);
  read_opt(j, "patience", c.patience);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "seed", c.seed);
}

void to_json(Json& j, const TransformerModel& m) {
  Json blocks = Json::array();
  for (const auto& b : m.blocks) {
    Json heads = Json::array();
    for (const auto& h : b.heads)
      heads.push_back(Json{{"w_q", h.w_q}, {"w_k", h.w_k}, {"w_v", h.w_v}});
    blocks.push_back(Json{{"heads", heads},
                          {"w_o", b.w_o},
                          {"ln1_gain", b.ln1_gain},
                          {"ln1_bias", b.ln1_bias},
                          {"w1", b.w1},
                          {"b1", b.b1},
                          {"w2", b.w2},
                          {"b2", b.b2},
                          {"ln2_gain", b.ln2_gain},
                          {"ln2_bias", b.ln2_bias}});
  }
  j = Json{{"config", m.config},
           {"feature_dim", m.feature_dim},
           {"input_projection", m.input_projection},
           {"blocks", blocks},
           {"head_weights", m.head_weights},
           {"head_bias", m.head_bias}};
}

void from_json(const Json& j, TransformerModel& m) {
  m.config = j.at("config").get<TransformerConfig>();
  m.feature_dim = j.at("feature_dim").get<std::size_t>();
  m.input_projection = j.at("input_projection").get<DenseArray>();
  m.blocks.clear();
  for (const auto& jb : j.at("blocks")) {
    EncoderBlock b;
    for (const auto& jh : jb.at("heads")) {
      b.heads.push_back({jh.at("w_q").get<DenseArray>(),
                         jh.at("w_k").get<DenseArray>(),
                         jh.at("w_v").get<DenseArray>()});
    }
    b.w_o = jb.at("w_o").get<DenseArray>();
    b.ln1_gain = jb.at("ln1_gain").get<DenseArray>();
    b.ln1_bias = jb.at("ln1_bias").get<DenseArray>();
    b.w1 = jb.at("w1").get<DenseArray>();
    b.b1 = jb.at("b1").get<DenseArray>();
    b.w2 = jb.at("w2").get<DenseArray>();
    b.b2 = jb.at("b2").get<DenseArray>();
    b.ln2_gain = jb.at("ln2_gain").get<DenseArray>();
    b.ln2_bias = jb.at("ln2_bias").get<DenseArray>();
    m.blocks.push_back(std::move(b));
  }
  m.head_weights = j.at("head_weights").get<DenseArray>();
  m.head_bias = j.at("head_bias").get<DenseArray>();
  m.validate();
}

void to_json(Json& j, const DatasetSchema& s) {
  Json cols = Json::array();
  for (const auto& c : s.columns) {
    Json jc{{"name", c.name}, {"kind", kind_name(c.kind)}};
    if (c.drop) jc["drop"] = true;
    cols.push_back(jc);
  }
  j = Json{{"name", s.name},
           {"has_header", s.has_header},
           {"delimiter", std::string(1, s.delimiter)},
           {"missing_tokens", s.missing_tokens},
           {"columns", cols},
           {"positive_labels", s.positive_labels}};
}

void from_json(const Json& j, DatasetSchema& s) {
  read_opt(j, "name", s.name);
  read_opt(j, "has_header", s.has_header);
  if (j.contains("delimiter")) {
    const auto d = j.at("delimiter").get<std::string>();
    if (d.size() != 1) throw FormatError("schema: delimiter must be one character");
    s.delimiter = d.front();
  }
  read_opt(j, "missing_tokens", s.missing_tokens);
  s.columns.clear();
  for (const auto& jc : j.at("columns")) {
    ColumnSpec c;
    c.name = jc.at("name").get<std::string>();
    c.kind = kind_from(jc.value("kind", std::string("numeric")));
    c.drop = jc.value("drop", false);
    s.columns.push_back(std::move(c));
  }
  read_opt(j, "positive_labels", s.positive_labels);
  s.validate();
}

void to_json(Json& j, const PreprocessOptions& o) {
  j = Json{{"normalization", normalization_name(o.normalization)},
           {"pca_components", o.pca_components},
           {"outlier_filter", o.outlier_filter},
           {"outlier_z", o.outlier_z}};
}

void from_json(const Json& j, PreprocessOptions& o) {
  if (j.contains("normalization"))
    o.normalization = normalization_from(j.at("normalization").get<std::string>());
  read_opt(j, "pca_components", o.pca_components);
  read_opt(j, "outlier_filter", o.outlier_filter);
  read_opt(j, "outlier_z", o.outlier_z);
}

void to_json(Json& j, const FeatureTransform& t) {
  j = Json{{"options", t.options},
           {"encoder",
            {{"numeric_names", t.encoder.numeric_names},
             {"categorical_names", t.encoder.categorical_names},
             {"vocabularies", t.encoder.vocabularies}}},
           {"normalizer",
            {{"mode", normalization_name(t.normalizer.mode)},
             {"first", t.normalizer.first},
             {"second", t.normalizer.second}}},
           {"pca", nullptr}};
  if (t.pca) {
    j["pca"] = Json{{"mean", t.pca->mean},
                    {"projection", t.pca->projection},
                    {"explained_variance", t.pca->explained_variance}};
  }
}

void from_json(const Json& j, FeatureTransform& t) {
  t.options = j.at("options").get<PreprocessOptions>();
  const Json& e = j.at("encoder");
  e.at("numeric_names").get_to(t.encoder.numeric_names);
  e.at("categorical_names").get_to(t.encoder.categorical_names);
  e.at("vocabularies").get_to(t.encoder.vocabularies);
  const Json& n = j.at("normalizer");
  t.normalizer.mode = normalization_from(n.at("mode").get<std::string>());
  n.at("first").get_to(t.normalizer.first);
  n.at("second").get_to(t.normalizer.second);
  t.pca.reset();
  if (j.contains("pca") && !j.at("pca").is_null()) {
    const Json& p = j.at("pca");
    t.pca = PcaModel{p.at("mean").get<DenseArray>(),
                     p.at("projection").get<DenseArray>(),
                     p.at("explained_variance").get<std::vector<double>>()};
  }
}

void to_json(Json& j, const CleaningReport& r) {
  j = Json{{"rows_read", r.rows_read},
           {"rows_kept", r.rows_kept},
           {"rows_excluded", r.rows_excluded},
           {"unparseable_numeric", r.unparseable_numeric},
           {"missing_label", r.missing_label},
           {"imputed_per_column", r.imputed_per_column}};
}

void to_json(Json& j, const PipelineConfig& c) {
  j = Json{{"seed", c.seed},
           {"forest", c.forest},
           {"gan", c.gan},
           {"augment_ratio", c.augment_ratio},
           {"transformer", c.transformer},
           {"stride", c.stride},
           {"train_stride", c.train_stride},
           {"fusion",
            {{"alpha", c.fusion.alpha}, {"variant", variant_key(c.fusion.variant)}}},
           {"preprocess", c.preprocess}};
}

void from_json(const Json& j, PipelineConfig& c) {
  read_opt(j, "seed", c.seed);
  read_opt(j, "forest", c.forest);
  read_opt(j, "gan", c.gan);
  read_opt(j, "augment_ratio", c.augment_ratio);
  read_opt(j, "transformer", c.transformer);
  read_opt(j, "stride", c.stride);
  read_opt(j, "train_stride", c.train_stride);
  if (j.contains("fusion")) {
    const Json& f = j.at("fusion");
    read_opt(f, "alpha", c.fusion.alpha);
    if (f.contains("variant"))
      c.fusion.variant = variant_from_key(f.at("variant").get<std::string>());
  }
  read_opt(j, "preprocess", c.preprocess);
}

void to_json(Json& j, const PipelineModel& m) {
  j = Json{{"config", m.config},
           {"transform", m.transform},
           {"forest", nullptr},
           {"gan", nullptr},
           {"transformer", nullptr},
           {"threshold", m.threshold},
           {"channel_center", m.channel_center},
           {"channel_scale", m.channel_scale},
           {"synthetic_records", m.synthetic_records},
           {"warnings", m.warnings}};
  if (m.forest) j["forest"] = *m.forest;
  if (m.gan) j["gan"] = *m.gan;
  if (m.transformer) j["transformer"] = *m.transformer;
}

void from_json(const Json& j, PipelineModel& m) {
  m.config = j.at("config").get<PipelineConfig>();
  m.transform = j.at("transform").get<FeatureTransform>();
  m.forest.reset();
  m.gan.reset();
  m.transformer.reset();
  if (!j.at("forest").is_null()) m.forest = j.at("forest").get<IsoForest>();
  if (!j.at("gan").is_null()) m.gan = j.at("gan").get<GanModel>();
  if (!j.at("transformer").is_null())
    m.transformer = j.at("transformer").get<TransformerModel>();
  m.threshold = j.at("threshold").get<double>();
  m.channel_center = j.at("channel_center").get<double>();
  m.channel_scale = j.at("channel_scale").get<double>();
  m.synthetic_records = j.at("synthetic_records").get<std::size_t>();
  m.warnings = j.at("warnings").get<std::vector<std::string>>();
}

void to_json(Json& j, const MetricsReport& r) {
  j = Json{{"name", r.name},
           {"accuracy", r.accuracy},
           {"precision", r.precision},
           {"recall", r.recall},
           {"f1_score", r.f1},
           {"auc", r.auc},
           {"forest_auc", r.forest_auc ? Json(*r.forest_auc) : Json(nullptr)},
           {"threshold", r.threshold},
           {"confusion",
            {{"tp", r.counts.tp}, {"tn", r.counts.tn},
             {"fp", r.counts.fp}, {"fn", r.counts.fn}}},
           {"parameters_m", r.resources.parameters_m},
           {"flops_g", r.resources.flops_g},
           {"inference_time_ms", r.resources.inference_time_ms},
           {"training_time_s", r.resources.training_time_s},
           {"parameter_count", r.resources.parameter_count},
           {"flop_count", r.resources.flop_count},
           {"seed", r.seed},
           {"environment", r.environment},
           {"config", r.config_json.empty() ? Json::object()
                                            : Json::parse(r.config_json)}};
}

void from_json(const Json& j, MetricsReport& r) {
  r.name = j.at("name").get<std::string>();
  r.accuracy = j.at("accuracy").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1_score").get<double>();
  r.auc = j.at("auc").get<double>();
  r.forest_auc.reset();
  if (!j.at("forest_auc").is_null()) r.forest_auc = j.at("forest_auc").get<double>();
  r.threshold = j.at("threshold").get<double>();
  const Json& c = j.at("confusion");
  r.counts = {c.at("tp").get<std::size_t>(), c.at("tn").get<std::size_t>(),
              c.at("fp").get<std::size_t>(), c.at("fn").get<std::size_t>()};
  r.resources.parameters_m = j.at("parameters_m").get<double>();
  r.resources.flops_g = j.at("flops_g").get<double>();
  r.resources.inference_time_ms = j.at("inference_time_ms").get<double>();
  r.resources.training_time_s = j.at("training_time_s").get<double>();
  r.resources.parameter_count = j.at("parameter_count").get<std::uint64_t>();
  r.resources.flop_count = j.at("flop_count").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.environment = j.at("environment").get<std::string>();
  const Json& cfg = j.at("config");
  r.config_json = cfg.empty() ? std::string() : cfg.dump();
}

Json make_envelope(const std::string& kind, Json body) {
  Json out = Json::object();
  out["schema_version"] =
      std::to_string(kSchemaMajor) + "." + std::to_string(kSchemaMinor);
  out["kind"] = kind;
  for (auto& [key, value] : body.items()) out[key] = std::move(value);
  return out;
}

Json open_envelope(const Json& document, const std::string& kind) {
  if (!document.is_object() || !document.contains("schema_version")) {
    throw FormatError("document has no schema_version");
  }
  const auto version = document.at("schema_version").get<std::string>();
  int major = -1;
  try {
    major = std::stoi(version.substr(0, version.find('.')));
  } catch (const std::exception&) {
    throw FormatError("malformed schema_version '" + version + "'");
  }
  if (major != kSchemaMajor) {
    throw FormatError("unsupported schema_version " + version + " (expected " +
                      std::to_string(kSchemaMajor) + ".x)");
  }
  if (document.value("kind", std::string()) != kind) {
    throw FormatError("expected a '" + kind + "' document, found '" +
                      document.value("kind", std::string()) + "'");
  }
  Json body = document;
  body.erase("schema_version");
  body.erase("kind");
  return body;
}

std::string model_to_string(const PipelineModel& model) {
  model.validate();
  return make_envelope("pipeline_model", Json(model)).dump();
}

PipelineModel model_from_string(const std::string& text) {
  return guarded("pipeline model", [&] {
    PipelineModel m =
        open_envelope(Json::parse(text), "pipeline_model").get<PipelineModel>();
    m.validate();
    return m;
  });
}

std::string report_to_string(const MetricsReport& report) {
  return make_envelope("report", Json(report)).dump(2);
}

MetricsReport report_from_string(const std::string& text) {
  return guarded("report", [&] {
    return open_envelope(Json::parse(text), "report").get<MetricsReport>();
  });
}

DatasetSchema load_schema(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  return guarded("schema", [&] { return Json::parse(text).get<DatasetSchema>(); });
}

void write_file_atomically(const std::filesystem::path& path,
                           const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw InputError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move report into " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace netanomaly
