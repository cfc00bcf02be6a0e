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

#ifndef HYDRA_PRESETS_H_
#define HYDRA_PRESETS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hydra/allocator.h"
#include "hydra/core.h"
#include "hydra/partitioner.h"
#include "hydra/toy_model.h"

namespace hydra {

struct ModelPreset {
  std::string name;
  ModelShape shape;
  int64_t r_standard;
};

// "mobilellama-1.4b" (24 x 2048 x 5632, r 128), "mobilellama-2.7b"
// (32 x 2560 x 6912, r 128), "toy-8" (8 x 64 x 172, r 16), "toy-6"
// (6 x 32 x 86, r 16). Throws kUnknownPreset.
ModelPreset FindModelPreset(std::string_view name);
std::vector<std::string> ModelPresetNames();

// Toy model configuration matching a toy-* preset's shape.
ToyModelConfig ToyConfigFor(const ModelPreset& preset, uint64_t seed);

// A coarse allocation shipped verbatim rather than computed.
struct CoarsePreset {
  std::string name;
  std::string model;
  StagePartition partition;
  CoarseAllocation allocation;
};

// "paper-config4": layers [1-8, 9-12, 13-24] at ranks (124, 126, 131) on the
// mobilellama-1.4b preset. Throws kUnknownPreset.
CoarsePreset FindCoarsePreset(std::string_view name);
std::vector<std::string> CoarsePresetNames();

// Coarse 24-layer schedules of the four stage-wise ablation configurations
// (index 1..4), built from contiguous layer ranges. Config1 and Config2 are
// not increasing, so they are plain schedules rather than allocations.
RankSchedule AblationConfigSchedule(int index);

// The 8 @ 64, 8 @ 128, 8 @ 256 increasing-rank example schedule.
RankSchedule IncreasingRankExampleSchedule();

}  // namespace hydra

#endif  // HYDRA_PRESETS_H_
