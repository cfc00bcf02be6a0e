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

#ifndef HYDRA_EXPORT_H_
#define HYDRA_EXPORT_H_

#include <cstdint>
#include <string_view>

#include "hydra/core.h"
#include "hydra/schedule_io.h"

namespace hydra {

// "q_proj", "k_proj", "v_proj", "o_proj", "up_proj", "down_proj", "gate_proj".
std::string_view ModuleName(ComponentKind kind);

// Most frequent rank over all layers and components; ties go to the smaller
// rank. Throws kEmptyInput for an empty schedule.
int64_t DefaultRank(const RankSchedule& schedule);

// {"default_rank": r, "num_layers": N, "schedule_hash": h,
//  "pattern": {"layers.<i>.<module>": rank, ...}}
// with 0-based layer indices and only the entries that differ from r.
Json RankPatternJson(const RankSchedule& schedule);

// Inverse of RankPatternJson (provenance is not recoverable). Throws kParse
// on a malformed key, unknown module, out-of-range layer or non-positive
// rank.
RankSchedule ScheduleFromRankPattern(const Json& json);

}  // namespace hydra

#endif  // HYDRA_EXPORT_H_
