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

#ifndef HYDRA_CORE_H_
#define HYDRA_CORE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hydra {

// Adapted projections of one transformer layer. The enumerator order is the
// serialization order.
enum class ComponentKind : uint8_t { kQ, kK, kV, kO, kUp, kDown, kGate };

inline constexpr int kNumComponents = 7;

inline constexpr std::array<ComponentKind, kNumComponents> kAllComponents = {
    ComponentKind::kQ,  ComponentKind::kK,    ComponentKind::kV,
    ComponentKind::kO,  ComponentKind::kUp,   ComponentKind::kDown,
    ComponentKind::kGate};

constexpr int ComponentIndex(ComponentKind kind) {
  return static_cast<int>(kind);
}

// "Q", "K", "V", "O", "Up", "Down", "Gate".
std::string_view ComponentName(ComponentKind kind);
std::optional<ComponentKind> ParseComponent(std::string_view name);

struct ComponentDims {
  int64_t in_dim = 0;
  int64_t out_dim = 0;
};

// Layer count and widths of a LLaMA-style decoder: square attention
// projections and a gated feed-forward block.
class ModelShape {
 public:
  // Throws Error(kInvalidArgument) unless every argument is >= 1.
  ModelShape(int64_t num_layers, int64_t hidden_dim, int64_t intermediate_dim);

  int64_t num_layers() const { return num_layers_; }
  int64_t hidden_dim() const { return hidden_dim_; }
  int64_t intermediate_dim() const { return intermediate_dim_; }

  ComponentDims dims(ComponentKind kind) const;

  // Sum over the seven components of (in_dim + out_dim): the adapter
  // parameters one unit of rank costs in one layer when all components share
  // that rank.
  int64_t UniformRankCostPerLayer() const;

  bool operator==(const ModelShape&) const = default;

 private:
  int64_t num_layers_;
  int64_t hidden_dim_;
  int64_t intermediate_dim_;
};

class ComponentRanks {
 public:
  ComponentRanks() = default;
  explicit ComponentRanks(const std::array<int64_t, kNumComponents>& ranks)
      : ranks_(ranks) {}

  static ComponentRanks Uniform(int64_t rank);

  int64_t operator[](ComponentKind kind) const {
    return ranks_[ComponentIndex(kind)];
  }
  int64_t& operator[](ComponentKind kind) {
    return ranks_[ComponentIndex(kind)];
  }

  const std::array<int64_t, kNumComponents>& values() const { return ranks_; }

  // True when all seven ranks are equal.
  bool IsCoarse() const;
  int64_t Sum() const;

  bool operator==(const ComponentRanks&) const = default;

 private:
  std::array<int64_t, kNumComponents> ranks_{};
};

// Where a schedule came from. coarse_base holds the per-layer coarse rank a
// fine-grained schedule was derived from; it is what the rank-sum budget is
// measured against.
struct Provenance {
  std::string partition_id;
  std::vector<int64_t> stage_ranks;
  std::string setting = "none";
  int64_t delta_d = 0;
  std::vector<int64_t> coarse_base;

  bool operator==(const Provenance&) const = default;
};

struct RankSchedule {
  std::vector<ComponentRanks> layers;
  Provenance provenance;

  int64_t num_layers() const { return static_cast<int64_t>(layers.size()); }
  bool IsCoarse() const;

  static RankSchedule Uniform(int64_t num_layers, int64_t rank);

  bool operator==(const RankSchedule&) const = default;
};

// Budget of the baseline uniform schedule at r_standard. The parameter cap is
// always derived from the shape.
class Budget {
 public:
  Budget(const ModelShape& shape, int64_t r_standard);

  int64_t r_standard() const { return r_standard_; }
  int64_t param_cap() const { return param_cap_; }
  int64_t rank_cap() const { return rank_cap_; }

 private:
  int64_t r_standard_;
  int64_t param_cap_;
  int64_t rank_cap_;
};

// Trainable LoRA parameters: sum over layers and components of
// rank * (in_dim + out_dim). Throws kShapeMismatch on a layer-count mismatch.
int64_t ParamCount(const RankSchedule& schedule, const ModelShape& shape);

// Sum of the per-layer coarse rank. Coarse layers contribute their common
// value; fine layers need provenance.coarse_base (kMissingProvenance
// otherwise). Throws kEmptyInput for an empty schedule.
int64_t RankTotal(const RankSchedule& schedule);

// Sum of all seven entries of every layer. Diagnostics only.
int64_t RankTotalAllComponents(const RankSchedule& schedule);

enum class ViolationKind { kLengthMismatch, kNonPositiveRank, kOverParamCap };

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  int64_t param_count = 0;
  int64_t param_cap = 0;

  bool admissible() const { return violations.empty(); }
};

ValidationReport Validate(const RankSchedule& schedule, const ModelShape& shape,
                          const Budget& budget);

}  // namespace hydra

#endif  // HYDRA_CORE_H_
