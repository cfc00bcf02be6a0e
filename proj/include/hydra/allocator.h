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

#ifndef HYDRA_ALLOCATOR_H_
#define HYDRA_ALLOCATOR_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hydra/core.h"
#include "hydra/partitioner.h"
#include "hydra/schedule_io.h"

namespace hydra {

struct AllocatorParams {
  int64_t r_standard = 128;
  int64_t delta_d = 2;
  int64_t max_outer_iterations = 10'000;
};

// One pass of the linear-increase loop: the candidate stage ranks and the
// ranks left over under the rank cap.
struct AllocationStep {
  std::vector<int64_t> ranks;
  int64_t n_remain = 0;

  bool operator==(const AllocationStep&) const = default;
};

struct CoarseAllocation {
  std::vector<int64_t> stage_ranks;
  int64_t iterations_used = 0;
  // sum_i stage_ranks[i] * |S_i|
  int64_t rank_sum = 0;
  std::vector<AllocationStep> trace;
};

// 2 * floor((r_standard - (num_layers - 1)) / 2). Throws kBudgetTooSmall when
// the result is not positive.
int64_t InitialRank(int64_t r_standard, int64_t num_layers);

// Raises R_1 one step at a time from InitialRank. For t stages, stages i < t
// get R_1 + (i-1) * delta_d and the last stage takes
// floor((N_R - sum_{i<t} R_i |S_i|) / |S_t|) with N_R = r_standard * N_l.
// Stops when the remaining rank goes negative or R_t <= R_{t-1} and returns
// the previous pass. A single stage is raised until it no longer fits.
// Throws kBudgetTooSmall when even the first pass is inadmissible and
// kNonTermination past max_outer_iterations.
CoarseAllocation AllocateCoarse(const StagePartition& partition,
                                const AllocatorParams& params,
                                int64_t num_layers);

// Per-component rank offsets in units of delta_d / 2 (so Setting4's
// -delta_d/2 is representable).
class FineSetting {
 public:
  enum class Kind { kNone, kSetting1, kSetting2, kSetting3, kSetting4, kSetting5, kCustom };

  static FineSetting None();
  static FineSetting Preset(int number);  // 1..5
  // `half_steps[c]` is the offset of component c in units of delta_d / 2.
  static FineSetting Custom(const std::array<int64_t, kNumComponents>& half_steps);
  // "none", "setting1".."setting5", or "custom:Q=-1,K=-1,Up=1.5" with offsets
  // in units of delta_d (multiples of 0.5). Throws kInvalidSetting.
  static FineSetting Parse(std::string_view text);

  Kind kind() const { return kind_; }
  std::string Name() const;
  const std::array<int64_t, kNumComponents>& half_steps() const { return half_steps_; }

  // Integer offset of each component for `delta_d`. Throws kInvalidSetting
  // when an odd half-step meets an odd delta_d.
  std::array<int64_t, kNumComponents> Offsets(int64_t delta_d) const;

 private:
  FineSetting(Kind kind, std::array<int64_t, kNumComponents> half_steps)
      : kind_(kind), half_steps_(half_steps) {}

  Kind kind_;
  std::array<int64_t, kNumComponents> half_steps_;
};

// Layer l in stage i gets |R_i| on all seven components. Provenance records
// the partition id, stage ranks and per-layer coarse base. Throws
// kShapeMismatch when the allocation and partition disagree on stage count.
RankSchedule AssembleSchedule(const CoarseAllocation& coarse,
                              const StagePartition& partition);

// Applies a fine setting to every layer of a coarse schedule. Throws
// kAlreadyRefined for a schedule that is already fine-grained or has a
// recorded setting, and kUnderflow naming layer and component for ranks < 1.
RankSchedule RefineSchedule(const RankSchedule& coarse_schedule,
                            const FineSetting& setting, int64_t delta_d);

// AssembleSchedule followed by RefineSchedule.
RankSchedule RefineFine(const CoarseAllocation& coarse,
                        const StagePartition& partition,
                        const FineSetting& setting, int64_t delta_d);

// {"params": {...}, "stage_sizes": [...], "stage_ranks": [...], "rank_sum",
//  "rank_cap", "iterations_used", "trace": [{"ranks": [...], "n_remain"}]}
Json AllocationReportJson(const CoarseAllocation& coarse,
                          const StagePartition& partition,
                          const AllocatorParams& params, int64_t num_layers);

}  // namespace hydra

#endif  // HYDRA_ALLOCATOR_H_
