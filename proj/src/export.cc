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

#include "hydra/export.h"

#include <array>
#include <map>
#include <string>

#include "hydra/error.h"

namespace hydra {

namespace {

constexpr std::array<std::string_view, kNumComponents> kModuleNames = {
    "q_proj", "k_proj", "v_proj", "o_proj", "up_proj", "down_proj", "gate_proj"};

}  // namespace

std::string_view ModuleName(ComponentKind kind) {
  return kModuleNames[static_cast<size_t>(ComponentIndex(kind))];
}

int64_t DefaultRank(const RankSchedule& schedule) {
  if (schedule.layers.empty()) {
    throw Error(ErrorCode::kEmptyInput, "schedule has no layers");
  }
  std::map<int64_t, int64_t> counts;
  for (const auto& layer : schedule.layers) {
    for (int64_t r : layer.values()) ++counts[r];
  }
  int64_t best = counts.begin()->first;
  int64_t best_count = 0;
  for (const auto& [rank, n] : counts) {
    if (n > best_count) {
      best = rank;
      best_count = n;
    }
  }
  return best;
}

Json RankPatternJson(const RankSchedule& schedule) {
  const int64_t default_rank = DefaultRank(schedule);
  Json pattern = Json::object();
  for (size_t l = 0; l < schedule.layers.size(); ++l) {
    for (ComponentKind kind : kAllComponents) {
      const int64_t r = schedule.layers[l][kind];
      if (r == default_rank) continue;
      pattern["layers." + std::to_string(l) + "." + std::string(ModuleName(kind))] = r;
    }
  }
  return Json{{"default_rank", default_rank},
              {"num_layers", schedule.num_layers()},
              {"schedule_hash", ScheduleHash(schedule)},
              {"pattern", pattern}};
}

RankSchedule ScheduleFromRankPattern(const Json& json) {
  auto fail = [](const std::string& msg) { return Error(ErrorCode::kParse, msg); };
  if (!json.is_object()) throw fail("rank pattern must be an object");
  for (const char* key : {"default_rank", "num_layers", "pattern"}) {
    if (!json.contains(key)) throw fail(std::string("rank pattern lacks \"") + key + "\"");
  }
  if (!json["default_rank"].is_number_integer() ||
      !json["num_layers"].is_number_integer() || !json["pattern"].is_object()) {
    throw fail("rank pattern fields have the wrong types");
  }
  const auto default_rank = json["default_rank"].get<int64_t>();
  const auto num_layers = json["num_layers"].get<int64_t>();
  if (default_rank < 1 || num_layers < 1) {
    throw fail("default_rank and num_layers must be positive");
  }
  RankSchedule schedule = RankSchedule::Uniform(num_layers, default_rank);
  schedule.provenance = Provenance{};
  for (const auto& [key, value] : json["pattern"].items()) {
    const auto first = key.find('.');
    const auto second = key.find('.', first == std::string::npos ? 0 : first + 1);
    if (key.rfind("layers.", 0) != 0 || second == std::string::npos) {
      throw fail("bad pattern key \"" + key + "\"");
    }
    const std::string index = key.substr(first + 1, second - first - 1);
    const std::string module = key.substr(second + 1);
    if (index.empty() || index.find_first_not_of("0123456789") != std::string::npos) {
      throw fail("bad layer index in \"" + key + "\"");
    }
    const int64_t layer = std::stoll(index);
    if (layer >= num_layers) throw fail("layer out of range in \"" + key + "\"");
    int found = -1;
    for (int c = 0; c < kNumComponents; ++c) {
      if (module == kModuleNames[static_cast<size_t>(c)]) found = c;
    }
    if (found < 0) throw fail("unknown module in \"" + key + "\"");
    if (!value.is_number_integer() || value.get<int64_t>() < 1) {
      throw fail("rank for \"" + key + "\" must be a positive integer");
    }
    schedule.layers[static_cast<size_t>(layer)][kAllComponents[static_cast<size_t>(found)]] =
        value.get<int64_t>();
  }
  return schedule;
}

}  // namespace hydra
