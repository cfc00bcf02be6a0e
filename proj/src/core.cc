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

#include "hydra/core.h"

#include <algorithm>
#include <numeric>

#include "hydra/error.h"

namespace hydra {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kMissingProvenance: return "missing-provenance";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kMalformedRecord: return "malformed-record";
    case ErrorCode::kInvalidK: return "invalid-k";
    case ErrorCode::kBudgetTooSmall: return "budget-too-small";
    case ErrorCode::kNonTermination: return "non-termination";
    case ErrorCode::kUnderflow: return "underflow";
    case ErrorCode::kAlreadyRefined: return "already-refined";
    case ErrorCode::kInvalidSetting: return "invalid-setting";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kTrainingDiverged: return "training-diverged";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kOracleFailure: return "oracle-failure";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kUnknownPreset: return "unknown-preset";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kValidationFailed: return "validation-failed";
  }
  return "unknown";
}

std::string_view ComponentName(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::kQ: return "Q";
    case ComponentKind::kK: return "K";
    case ComponentKind::kV: return "V";
    case ComponentKind::kO: return "O";
    case ComponentKind::kUp: return "Up";
    case ComponentKind::kDown: return "Down";
    case ComponentKind::kGate: return "Gate";
  }
  return "?";
}

std::optional<ComponentKind> ParseComponent(std::string_view name) {
  for (ComponentKind kind : kAllComponents) {
    if (ComponentName(kind) == name) return kind;
  }
  return std::nullopt;
}

ModelShape::ModelShape(int64_t num_layers, int64_t hidden_dim,
                       int64_t intermediate_dim)
    : num_layers_(num_layers),
      hidden_dim_(hidden_dim),
      intermediate_dim_(intermediate_dim) {
  if (num_layers < 1 || hidden_dim < 1 || intermediate_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "model shape dimensions must all be >= 1");
  }
}

ComponentDims ModelShape::dims(ComponentKind kind) const {
  switch (kind) {
    case ComponentKind::kQ:
    case ComponentKind::kK:
    case ComponentKind::kV:
    case ComponentKind::kO:
      return {hidden_dim_, hidden_dim_};
    case ComponentKind::kUp:
    case ComponentKind::kGate:
      return {hidden_dim_, intermediate_dim_};
    case ComponentKind::kDown:
      return {intermediate_dim_, hidden_dim_};
  }
  return {};
}

int64_t ModelShape::UniformRankCostPerLayer() const {
  int64_t total = 0;
  for (ComponentKind kind : kAllComponents) {
    const ComponentDims d = dims(kind);
    total += d.in_dim + d.out_dim;
  }
  return total;
}

ComponentRanks ComponentRanks::Uniform(int64_t rank) {
  std::array<int64_t, kNumComponents> values;
  values.fill(rank);
  return ComponentRanks(values);
}

bool ComponentRanks::IsCoarse() const {
  return std::all_of(ranks_.begin(), ranks_.end(),
                     [&](int64_t r) { return r == ranks_[0]; });
}

int64_t ComponentRanks::Sum() const {
  return std::accumulate(ranks_.begin(), ranks_.end(), int64_t{0});
}

bool RankSchedule::IsCoarse() const {
  return std::all_of(layers.begin(), layers.end(),
                     [](const ComponentRanks& r) { return r.IsCoarse(); });
}

RankSchedule RankSchedule::Uniform(int64_t num_layers, int64_t rank) {
  RankSchedule schedule;
  schedule.layers.assign(static_cast<size_t>(num_layers),
                         ComponentRanks::Uniform(rank));
  return schedule;
}

Budget::Budget(const ModelShape& shape, int64_t r_standard)
    : r_standard_(r_standard) {
  if (r_standard < 1) {
    throw Error(ErrorCode::kInvalidArgument, "r_standard must be >= 1");
  }
  param_cap_ =
      ParamCount(RankSchedule::Uniform(shape.num_layers(), r_standard), shape);
  rank_cap_ = r_standard * shape.num_layers();
}

int64_t ParamCount(const RankSchedule& schedule, const ModelShape& shape) {
  if (schedule.num_layers() != shape.num_layers()) {
    throw Error(ErrorCode::kShapeMismatch,
                "schedule has " + std::to_string(schedule.num_layers()) +
                    " layers, shape has " +
                    std::to_string(shape.num_layers()));
  }
  int64_t total = 0;
  for (const ComponentRanks& layer : schedule.layers) {
    for (ComponentKind kind : kAllComponents) {
      const ComponentDims d = shape.dims(kind);
      total += layer[kind] * (d.in_dim + d.out_dim);
    }
  }
  return total;
}

int64_t RankTotal(const RankSchedule& schedule) {
  if (schedule.layers.empty()) {
    throw Error(ErrorCode::kEmptyInput, "rank total of an empty schedule");
  }
  const auto& base = schedule.provenance.coarse_base;
  const bool has_base = base.size() == schedule.layers.size();
  int64_t total = 0;
  for (size_t l = 0; l < schedule.layers.size(); ++l) {
    const ComponentRanks& layer = schedule.layers[l];
    if (layer.IsCoarse()) {
      total += layer[ComponentKind::kQ];
    } else if (has_base) {
      total += base[l];
    } else {
      throw Error(ErrorCode::kMissingProvenance,
                  "layer " + std::to_string(l + 1) +
                      " is fine-grained but the schedule records no coarse "
                      "base rank");
    }
  }
  return total;
}

int64_t RankTotalAllComponents(const RankSchedule& schedule) {
  int64_t total = 0;
  for (const ComponentRanks& layer : schedule.layers) total += layer.Sum();
  return total;
}

ValidationReport Validate(const RankSchedule& schedule, const ModelShape& shape,
                          const Budget& budget) {
  ValidationReport report;
  report.param_cap = budget.param_cap();
  if (schedule.num_layers() != shape.num_layers()) {
    report.violations.push_back(
        {ViolationKind::kLengthMismatch,
         "schedule has " + std::to_string(schedule.num_layers()) +
             " layers, expected " + std::to_string(shape.num_layers())});
  }
  for (size_t l = 0; l < schedule.layers.size(); ++l) {
    for (ComponentKind kind : kAllComponents) {
      if (schedule.layers[l][kind] < 1) {
        report.violations.push_back(
            {ViolationKind::kNonPositiveRank,
             "layer " + std::to_string(l + 1) + " component " +
                 std::string(ComponentName(kind)) + " has rank " +
                 std::to_string(schedule.layers[l][kind])});
      }
    }
  }
  if (schedule.num_layers() == shape.num_layers()) {
    report.param_count = ParamCount(schedule, shape);
    if (report.param_count > budget.param_cap()) {
      report.violations.push_back(
          {ViolationKind::kOverParamCap,
           "param count " + std::to_string(report.param_count) +
               " exceeds cap " + std::to_string(budget.param_cap())});
    }
  }
  return report;
}

}  // namespace hydra
