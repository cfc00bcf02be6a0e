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

#include "hydra/presets.h"

#include "hydra/error.h"

namespace hydra {
namespace {

RankSchedule ContiguousSchedule(const std::vector<int64_t>& sizes,
                                const std::vector<int64_t>& ranks) {
  const StagePartition partition = StagePartition::Contiguous(sizes);
  CoarseAllocation allocation;
  allocation.stage_ranks = ranks;
  return AssembleSchedule(allocation, partition);
}

}  // namespace

ModelPreset FindModelPreset(std::string_view name) {
  if (name == "mobilellama-1.4b") {
    return {std::string(name), ModelShape(24, 2048, 5632), 128};
  }
  if (name == "mobilellama-2.7b") {
    return {std::string(name), ModelShape(32, 2560, 6912), 128};
  }
  if (name == "toy-8") return {std::string(name), ModelShape(8, 64, 172), 16};
  if (name == "toy-6") return {std::string(name), ModelShape(6, 32, 86), 16};
  throw Error(ErrorCode::kUnknownPreset,
              "unknown model preset \"" + std::string(name) + "\"");
}

std::vector<std::string> ModelPresetNames() {
  return {"mobilellama-1.4b", "mobilellama-2.7b", "toy-8", "toy-6"};
}

ToyModelConfig ToyConfigFor(const ModelPreset& preset, uint64_t seed) {
  ToyModelConfig config;
  config.num_layers = preset.shape.num_layers();
  config.hidden_dim = preset.shape.hidden_dim();
  config.intermediate_dim = preset.shape.intermediate_dim();
  config.seed = seed;
  return config;
}

CoarsePreset FindCoarsePreset(std::string_view name) {
  if (name == "paper-config4") {
    const std::vector<int64_t> sizes = {8, 4, 12};
    CoarsePreset preset{std::string(name), "mobilellama-1.4b",
                        StagePartition::Contiguous(sizes), {}};
    preset.allocation.stage_ranks = {124, 126, 131};
    for (size_t i = 0; i < sizes.size(); ++i) {
      preset.allocation.rank_sum += sizes[i] * preset.allocation.stage_ranks[i];
    }
    return preset;
  }
  throw Error(ErrorCode::kUnknownPreset,
              "unknown coarse preset \"" + std::string(name) + "\"");
}

std::vector<std::string> CoarsePresetNames() { return {"paper-config4"}; }

RankSchedule AblationConfigSchedule(int index) {
  switch (index) {
    case 1: return ContiguousSchedule({4, 16, 4}, {128, 64, 128});
    case 2: return ContiguousSchedule({4, 16, 4}, {256, 128, 256});
    case 3: return ContiguousSchedule({8, 8, 8}, {64, 128, 256});
    case 4: return ContiguousSchedule({8, 4, 12}, {124, 126, 131});
    default:
      throw Error(ErrorCode::kUnknownPreset,
                  "no ablation config " + std::to_string(index));
  }
}

RankSchedule IncreasingRankExampleSchedule() {
  return ContiguousSchedule({8, 8, 8}, {64, 128, 256});
}

}  // namespace hydra
