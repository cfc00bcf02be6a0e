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

#ifndef HYDRA_PROFILER_H_
#define HYDRA_PROFILER_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hydra/core.h"
#include "hydra/grad_log.h"
#include "hydra/schedule_io.h"
#include "hydra/toy_model.h"

namespace hydra {

// Average gradient norm of one layer: the mean over every logged block norm
// of that layer (all steps, all components).
struct LayerGradProfile {
  int64_t layer = 1;
  double mean_norm = 0.0;
  std::map<ComponentKind, double> component_means;
  int64_t sample_count = 0;

  bool operator==(const LayerGradProfile&) const = default;
};

// One profile per distinct layer, ordered by layer. Sums are taken over
// sorted values, so the result does not depend on record order. Throws
// kEmptyInput for no records and kMalformedRecord for an invalid record.
std::vector<LayerGradProfile> IngestGradLog(std::span<const GradLogRecord> records);

// Mean of each component's norms across all layers and steps.
std::map<ComponentKind, double> ComponentMeans(std::span<const GradLogRecord> records);

struct ToyProfileResult {
  std::vector<LayerGradProfile> profiles;
  std::vector<GradLogRecord> grad_log;
  std::vector<double> losses;
};

// Trains the toy LoRA transformer and aggregates its gradient log. Requires
// at least two layers and one step.
ToyProfileResult ProfileToyModel(const ToyTrainerConfig& config);

// Spearman rank correlation between layer index and mean_norm (average ranks
// for ties). Returns 0 when either side is constant.
double LayerNormSpearman(std::span<const LayerGradProfile> profiles);

inline constexpr std::string_view kProfileVersion = "hydra-profile/1";

// {"version", "layers": [{"layer", "mean_norm", "component_means": {...},
// "sample_count"}]}
Json ProfilesToJson(std::span<const LayerGradProfile> profiles);
std::vector<LayerGradProfile> ProfilesFromJson(const Json& json);

}  // namespace hydra

#endif  // HYDRA_PROFILER_H_
