// Copyright 2026 The Hydra Rank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hydra/profiler.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hydra/error.h"

namespace hydra {
namespace {

std::string LineTag(int64_t line_number) {
  return "line " + std::to_string(line_number) + ": ";
}

void CheckRecord(const GradLogRecord& r, const std::string& where) {
  if (r.layer < 1) {
    throw Error(ErrorCode::kMalformedRecord, where + "layer must be >= 1");
  }
  if (r.step < 0) {
    throw Error(ErrorCode::kMalformedRecord, where + "step must be >= 0");
  }
  if (!std::isfinite(r.grad_norm) || r.grad_norm < 0.0) {
    throw Error(ErrorCode::kMalformedRecord,
                where + "grad_norm must be finite and non-negative");
  }
}

double SortedMean(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

std::vector<double> AverageRanks(const std::vector<double>& values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

GradLogRecord ParseGradLogLine(std::string_view line, int64_t line_number) {
  const std::string where = LineTag(line_number);
  Json json;
  try {
    json = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kMalformedRecord, where + "invalid JSON");
  }
  if (!json.is_object()) {
    throw Error(ErrorCode::kMalformedRecord, where + "record must be an object");
  }
  for (const char* key : {"step", "layer", "component", "grad_norm"}) {
    if (!json.contains(key)) {
      throw Error(ErrorCode::kMalformedRecord,
                  where + "missing key \"" + key + "\"");
    }
  }
  if (!json["step"].is_number_integer() || !json["layer"].is_number_integer() ||
      !json["component"].is_string() || !json["grad_norm"].is_number()) {
    throw Error(ErrorCode::kMalformedRecord, where + "wrongly typed field");
  }
  const auto component = ParseComponent(json["component"].get<std::string>());
  if (!component) {
    throw Error(ErrorCode::kMalformedRecord,
                where + "unknown component \"" +
                    json["component"].get<std::string>() + "\"");
  }
  GradLogRecord record{json["step"].get<int64_t>(), json["layer"].get<int64_t>(),
                       *component, json["grad_norm"].get<double>()};
  CheckRecord(record, where);
  return record;
}

std::vector<GradLogRecord> ReadGradLog(std::istream& in) {
  std::vector<GradLogRecord> records;
  std::string line;
  int64_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(ParseGradLogLine(line, line_number));
  }
  return records;
}

std::string GradLogLine(const GradLogRecord& record) {
  Json json = Json::object();
  json["step"] = record.step;
  json["layer"] = record.layer;
  json["component"] = ComponentName(record.component);
  json["grad_norm"] = record.grad_norm;
  return json.dump();
}

std::vector<LayerGradProfile> IngestGradLog(std::span<const GradLogRecord> records) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyInput, "gradient log has no records");
  }
  std::map<int64_t, std::vector<double>> per_layer;
  std::map<int64_t, std::map<ComponentKind, std::vector<double>>> per_component;
  for (size_t i = 0; i < records.size(); ++i) {
    const GradLogRecord& r = records[i];
    CheckRecord(r, "record " + std::to_string(i + 1) + ": ");
    per_layer[r.layer].push_back(r.grad_norm);
    per_component[r.layer][r.component].push_back(r.grad_norm);
  }
  std::vector<LayerGradProfile> profiles;
  for (auto& [layer, values] : per_layer) {
    LayerGradProfile p;
    p.layer = layer;
    p.sample_count = static_cast<int64_t>(values.size());
    p.mean_norm = SortedMean(values);
    for (auto& [kind, norms] : per_component[layer]) {
      p.component_means[kind] = SortedMean(norms);
    }
    profiles.push_back(std::move(p));
  }
  return profiles;
}

std::map<ComponentKind, double> ComponentMeans(
    std::span<const GradLogRecord> records) {
  std::map<ComponentKind, std::vector<double>> grouped;
  for (const GradLogRecord& r : records) grouped[r.component].push_back(r.grad_norm);
  std::map<ComponentKind, double> means;
  for (auto& [kind, values] : grouped) means[kind] = SortedMean(values);
  return means;
}

ToyProfileResult ProfileToyModel(const ToyTrainerConfig& config) {
  if (config.model.num_layers < 2) {
    throw Error(ErrorCode::kInvalidArgument, "profiling needs >= 2 layers");
  }
  ToyTrainingResult trained = TrainToyModel(config);
  ToyProfileResult result;
  result.profiles = IngestGradLog(trained.grad_log);
  result.grad_log = std::move(trained.grad_log);
  result.losses = std::move(trained.losses);
  return result;
}

double LayerNormSpearman(std::span<const LayerGradProfile> profiles) {
  std::vector<double> layers, norms;
  for (const LayerGradProfile& p : profiles) {
    layers.push_back(static_cast<double>(p.layer));
    norms.push_back(p.mean_norm);
  }
  const std::vector<double> a = AverageRanks(layers);
  const std::vector<double> b = AverageRanks(norms);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

Json ProfilesToJson(std::span<const LayerGradProfile> profiles) {
  Json json = Json::object();
  json["version"] = kProfileVersion;
  Json layers = Json::array();
  for (const LayerGradProfile& p : profiles) {
    Json entry = Json::object();
    entry["layer"] = p.layer;
    entry["mean_norm"] = p.mean_norm;
    Json comps = Json::object();
    for (const auto& [kind, mean] : p.component_means) {
      comps[std::string(ComponentName(kind))] = mean;
    }
    entry["component_means"] = std::move(comps);
    entry["sample_count"] = p.sample_count;
    layers.push_back(std::move(entry));
  }
  json["layers"] = std::move(layers);
  return json;
}

std::vector<LayerGradProfile> ProfilesFromJson(const Json& json) {
  if (!json.is_object() || json.value("version", "") != kProfileVersion ||
      !json.contains("layers")) {
    throw Error(ErrorCode::kParse, "not a " + std::string(kProfileVersion) +
                                       " document");
  }
  std::vector<LayerGradProfile> profiles;
  for (const Json& entry : json["layers"]) {
    LayerGradProfile p;
    p.layer = entry.at("layer").get<int64_t>();
    p.mean_norm = entry.at("mean_norm").get<double>();
    p.sample_count = entry.value("sample_count", int64_t{1});
    if (entry.contains("component_means")) {
      for (const auto& [key, value] : entry["component_means"].items()) {
        const auto kind = ParseComponent(key);
        if (!kind) throw Error(ErrorCode::kParse, "unknown component " + key);
        p.component_means[*kind] = value.get<double>();
      }
    }
    if (p.layer < 1 || !std::isfinite(p.mean_norm) || p.mean_norm < 0.0) {
      throw Error(ErrorCode::kParse, "invalid profile entry");
    }
    profiles.push_back(std::move(p));
  }
  if (profiles.empty()) throw Error(ErrorCode::kEmptyInput, "no profiles");
  return profiles;
}

}  // namespace hydra
