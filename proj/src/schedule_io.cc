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

#include "hydra/schedule_io.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hydra/error.h"

namespace hydra {
namespace {

Json LayerToJson(const ComponentRanks& ranks) {
  Json layer = Json::object();
  for (ComponentKind kind : kAllComponents) {
    layer[std::string(ComponentName(kind))] = ranks[kind];
  }
  return layer;
}

int64_t RequireInt(const Json& value, const std::string& what) {
  if (!value.is_number_integer()) {
    throw Error(ErrorCode::kParse, what + " must be an integer");
  }
  return value.get<int64_t>();
}

std::vector<int64_t> IntArray(const Json& value, const std::string& what) {
  if (!value.is_array()) {
    throw Error(ErrorCode::kParse, what + " must be an array");
  }
  std::vector<int64_t> out;
  for (const Json& v : value) out.push_back(RequireInt(v, what + " entry"));
  return out;
}

}  // namespace

Json ScheduleToJson(const RankSchedule& schedule) {
  Json json = Json::object();
  json["version"] = kScheduleVersion;
  json["num_layers"] = schedule.num_layers();
  Json layers = Json::array();
  for (const ComponentRanks& layer : schedule.layers) {
    layers.push_back(LayerToJson(layer));
  }
  json["layers"] = std::move(layers);
  const Provenance& p = schedule.provenance;
  Json provenance = Json::object();
  provenance["partition_id"] = p.partition_id;
  provenance["stage_ranks"] = p.stage_ranks;
  provenance["setting"] = p.setting;
  provenance["delta_d"] = p.delta_d;
  provenance["coarse_base"] = p.coarse_base;
  json["provenance"] = std::move(provenance);
  return json;
}

RankSchedule ScheduleFromJson(const Json& json) {
  if (!json.is_object()) {
    throw Error(ErrorCode::kParse, "schedule must be a JSON object");
  }
  if (!json.contains("version") || json["version"] != kScheduleVersion) {
    throw Error(ErrorCode::kParse, "schedule version must be \"" +
                                       std::string(kScheduleVersion) + "\"");
  }
  if (!json.contains("layers") || !json["layers"].is_array()) {
    throw Error(ErrorCode::kParse, "schedule has no \"layers\" array");
  }
  RankSchedule schedule;
  for (const Json& layer : json["layers"]) {
    if (!layer.is_object() || layer.size() != kNumComponents) {
      throw Error(ErrorCode::kParse,
                  "each layer must list exactly the seven components");
    }
    ComponentRanks ranks;
    for (const auto& [key, value] : layer.items()) {
      const auto kind = ParseComponent(key);
      if (!kind) {
        throw Error(ErrorCode::kParse, "unknown component key \"" + key + "\"");
      }
      ranks[*kind] = RequireInt(value, "rank of " + key);
    }
    schedule.layers.push_back(ranks);
  }
  if (json.contains("num_layers") &&
      RequireInt(json["num_layers"], "num_layers") != schedule.num_layers()) {
    throw Error(ErrorCode::kParse, "num_layers disagrees with layers array");
  }
  if (json.contains("provenance")) {
    const Json& p = json["provenance"];
    if (!p.is_object()) {
      throw Error(ErrorCode::kParse, "provenance must be an object");
    }
    Provenance& out = schedule.provenance;
    if (p.contains("partition_id")) {
      out.partition_id = p["partition_id"].get<std::string>();
    }
    if (p.contains("stage_ranks")) {
      out.stage_ranks = IntArray(p["stage_ranks"], "stage_ranks");
    }
    if (p.contains("setting")) out.setting = p["setting"].get<std::string>();
    if (p.contains("delta_d")) out.delta_d = RequireInt(p["delta_d"], "delta_d");
    if (p.contains("coarse_base")) {
      out.coarse_base = IntArray(p["coarse_base"], "coarse_base");
    }
  }
  return schedule;
}

std::string ScheduleHash(const RankSchedule& schedule) {
  uint64_t hash = 1469598103934665603ULL;
  auto mix = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      hash ^= (v >> (8 * i)) & 0xffU;
      hash *= 1099511628211ULL;
    }
  };
  mix(static_cast<uint64_t>(schedule.layers.size()));
  for (const ComponentRanks& layer : schedule.layers) {
    for (int64_t r : layer.values()) mix(static_cast<uint64_t>(r));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json ReadJsonFile(const std::filesystem::path& path) {
  const std::string text = ReadTextFile(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string DumpJson(const Json& json) { return json.dump(2) + "\n"; }

}  // namespace hydra
