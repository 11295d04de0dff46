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

#ifndef NETANOMALY_SERIALIZATION_HPP_
#define NETANOMALY_SERIALIZATION_HPP_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "netanomaly/gan.hpp"
#include "netanomaly/isolation_forest.hpp"
#include "netanomaly/metrics.hpp"
#include "netanomaly/pipeline.hpp"
#include "netanomaly/preprocessing.hpp"
#include "netanomaly/transformer.hpp"

namespace netanomaly {

// Every document carries "schema_version": "<major>.<minor>". Loaders
// accept any minor revision of kSchemaMajor and reject other majors.
inline constexpr int kSchemaMajor = 1;
inline constexpr int kSchemaMinor = 0;

using Json = nlohmann::json;

void to_json(Json& j, const DenseArray& a);
void from_json(const Json& j, DenseArray& a);
void to_json(Json& j, const ForestConfig& c);
void from_json(const Json& j, ForestConfig& c);
void to_json(Json& j, const IsoForest& f);
void from_json(const Json& j, IsoForest& f);
void to_json(Json& j, const MlpParams& p);
void from_json(const Json& j, MlpParams& p);
void to_json(Json& j, const GanConfig& c);
void from_json(const Json& j, GanConfig& c);
void to_json(Json& j, const GanModel& m);
void from_json(const Json& j, GanModel& m);
void to_json(Json& j, const TransformerConfig& c);
void from_json(const Json& j, TransformerConfig& c);
void to_json(Json& j, const TransformerModel& m);
void from_json(const Json& j, TransformerModel& m);
void to_json(Json& j, const DatasetSchema& s);
void from_json(const Json& j, DatasetSchema& s);
void to_json(Json& j, const PreprocessOptions& o);
void from_json(const Json& j, PreprocessOptions& o);
void to_json(Json& j, const FeatureTransform& t);
void from_json(const Json& j, FeatureTransform& t);
void to_json(Json& j, const CleaningReport& r);
void to_json(Json& j, const PipelineConfig& c);
void from_json(const Json& j, PipelineConfig& c);
void to_json(Json& j, const PipelineModel& m);
void from_json(const Json& j, PipelineModel& m);
void to_json(Json& j, const MetricsReport& r);
void from_json(const Json& j, MetricsReport& r);

// Wraps `body` with schema_version and kind.
Json make_envelope(const std::string& kind, Json body);
// Checks version and kind and returns the body. Throws FormatError.
Json open_envelope(const Json& document, const std::string& kind);

std::string model_to_string(const PipelineModel& model);
PipelineModel model_from_string(const std::string& text);

std::string report_to_string(const MetricsReport& report);
MetricsReport report_from_string(const std::string& text);

DatasetSchema load_schema(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place, so a
// reader never observes a partial file.
void write_file_atomically(const std::filesystem::path& path,
                           const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace netanomaly

#endif  // NETANOMALY_SERIALIZATION_HPP_
