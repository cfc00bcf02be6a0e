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

#ifndef HYDRA_SCHEDULE_IO_H_
#define HYDRA_SCHEDULE_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "hydra/core.h"
#include "json.hpp"

namespace hydra {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kScheduleVersion = "hydra-schedule/1";

// {"version", "num_layers", "layers": [{"Q":..,...,"Gate":..}], "provenance"}
Json ScheduleToJson(const RankSchedule& schedule);

// Throws Error(kParse) on a wrong version, missing keys, unknown component
// keys or non-integer ranks.
RankSchedule ScheduleFromJson(const Json& json);

// Stable 64-bit FNV-1a hash of the layer ranks (provenance excluded), as 16
// lowercase hex digits.
std::string ScheduleHash(const RankSchedule& schedule);

Json ReadJsonFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);
std::string ReadTextFile(const std::filesystem::path& path);

// Two-space indented dump with a trailing newline.
std::string DumpJson(const Json& json);

}  // namespace hydra

#endif  // HYDRA_SCHEDULE_IO_H_
