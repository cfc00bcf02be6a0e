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

#include "hydra/allocator.h"

#include <cmath>
#include <sstream>

#include "hydra/error.h"

namespace hydra {
namespace {

int64_t FloorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

AllocationStep Evaluate(int64_t r1, const std::vector<int64_t>& sizes,
                        int64_t delta_d, int64_t rank_cap) {
  const size_t t = sizes.size();
  AllocationStep step;
  step.ranks.resize(t);
  if (t == 1) {
    step.ranks[0] = r1;
  } else {
    int64_t used = 0;
    for (size_t i = 0; i + 1 < t; ++i) {
      step.ranks[i] = r1 + static_cast<int64_t>(i) * delta_d;
      used += step.ranks[i] * sizes[i];
    }
    step.ranks[t - 1] = FloorDiv(rank_cap - used, sizes[t - 1]);
  }
  int64_t total = 0;
  for (size_t i = 0; i < t; ++i) total += step.ranks[i] * sizes[i];
  step.n_remain = rank_cap - total;
  return step;
}

bool Stops(const AllocationStep& step) {
  const size_t t = step.ranks.size();
  if (step.n_remain < 0) return true;
  return t >= 2 && step.ranks[t - 1] <= step.ranks[t - 2];
}

}  // namespace

int64_t InitialRank(int64_t r_standard, int64_t num_layers) {
  const int64_t value = 2 * FloorDiv(r_standard - (num_layers - 1), 2);
  if (value <= 0) {
    throw Error(ErrorCode::kBudgetTooSmall,
                "initial rank " + std::to_string(value) + " for r_standard " +
                    std::to_string(r_standard) + " and " +
                    std::to_string(num_layers) + " layers");
  }
  return value;
}

CoarseAllocation AllocateCoarse(const StagePartition& partition,
                                const AllocatorParams& params,
                                int64_t num_layers) {
  if (partition.num_stages() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "empty partition");
  }
  if (partition.num_layers() != num_layers) {
    throw Error(ErrorCode::kShapeMismatch,
                "partition covers " + std::to_string(partition.num_layers()) +
                    " layers, model has " + std::to_string(num_layers));
  }
  if (params.delta_d < 1) {
    throw Error(ErrorCode::kInvalidArgument, "delta_d must be >= 1");
  }
  const std::vector<int64_t> sizes = partition.sizes();
  const int64_t rank_cap = params.r_standard * num_layers;
  int64_t r1 = InitialRank(params.r_standard, num_layers);

  CoarseAllocation result;
  std::optional<AllocationStep> previous;
  for (int64_t iter = 0;; ++iter) {
    if (iter >= params.max_outer_iterations) {
      throw Error(ErrorCode::kNonTermination,
                  "allocation did not stop within " +
                      std::to_string(params.max_outer_iterations) + " passes");
    }
    AllocationStep step = Evaluate(r1, sizes, params.delta_d, rank_cap);
    result.trace.push_back(step);
    if (Stops(step)) {
      if (!previous) {
        throw Error(ErrorCode::kBudgetTooSmall,
                    "the first pass (R_1 = " + std::to_string(r1) +
                        ") already violates the rank budget or ordering");
      }
      break;
    }
    previous = std::move(step);
    ++r1;
  }
  result.stage_ranks = previous->ranks;
  result.iterations_used = static_cast<int64_t>(result.trace.size());
  result.rank_sum = rank_cap - previous->n_remain;
  return result;
}

FineSetting FineSetting::None() { return FineSetting(Kind::kNone, {}); }

FineSetting FineSetting::Preset(int number) {
  using C = ComponentKind;
  std::array<int64_t, kNumComponents> h{};
  auto set = [&](C kind, int64_t half) { h[ComponentIndex(kind)] = half; };
  switch (number) {
    case 1:
      set(C::kQ, -2), set(C::kK, -2), set(C::kUp, 2);
      return FineSetting(Kind::kSetting1, h);
    case 2:
      set(C::kQ, -2), set(C::kK, -2), set(C::kUp, 2), set(C::kDown, 2);
      return FineSetting(Kind::kSetting2, h);
    case 3:
      set(C::kQ, -2), set(C::kK, -2);
      return FineSetting(Kind::kSetting3, h);
    case 4:
      set(C::kQ, -1), set(C::kK, -1), set(C::kUp, 2);
      return FineSetting(Kind::kSetting4, h);
    case 5:
      set(C::kQ, -2), set(C::kK, -2), set(C::kUp, 4);
      return FineSetting(Kind::kSetting5, h);
    default:
      throw Error(ErrorCode::kInvalidSetting,
                  "no fine setting " + std::to_string(number));
  }
}

FineSetting FineSetting::Custom(const std::array<int64_t, kNumComponents>& half_steps) {
  return FineSetting(Kind::kCustom, half_steps);
}

FineSetting FineSetting::Parse(std::string_view text) {
  std::string lower(text);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "none" || lower == "coarse") return None();
  if (lower.size() == 8 && lower.starts_with("setting") && lower[7] >= '1' &&
      lower[7] <= '5') {
    return Preset(lower[7] - '0');
  }
  if (lower.starts_with("custom:")) {
    std::array<int64_t, kNumComponents> h{};
    std::stringstream ss(std::string(text.substr(7)));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const size_t eq = item.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::kInvalidSetting, "expected Component=offset: " + item);
      }
      const auto kind = ParseComponent(item.substr(0, eq));
      if (!kind) {
        throw Error(ErrorCode::kInvalidSetting,
                    "unknown component " + item.substr(0, eq));
      }
      double offset = 0.0;
      try {
        offset = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidSetting, "bad offset in " + item);
      }
      const double half = offset * 2.0;
      if (std::abs(half - std::round(half)) > 1e-9) {
        throw Error(ErrorCode::kInvalidSetting,
                    "offsets must be multiples of 0.5: " + item);
      }
      h[ComponentIndex(*kind)] = std::llround(half);
    }
    return Custom(h);
  }
  throw Error(ErrorCode::kInvalidSetting, "unknown fine setting \"" +
                                              std::string(text) + "\"");
}

std::string FineSetting::Name() const {
  switch (kind_) {
    case Kind::kNone: return "none";
    case Kind::kSetting1: return "setting1";
    case Kind::kSetting2: return "setting2";
    case Kind::kSetting3: return "setting3";
    case Kind::kSetting4: return "setting4";
    case Kind::kSetting5: return "setting5";
    case Kind::kCustom: break;
  }
  std::string out = "custom:";
  bool first = true;
  for (ComponentKind kind : kAllComponents) {
    const int64_t h = half_steps_[ComponentIndex(kind)];
    if (h == 0) continue;
    if (!first) out += ",";
    first = false;
    std::ostringstream v;
    v << static_cast<double>(h) / 2.0;
    out += std::string(ComponentName(kind)) + "=" + v.str();
  }
  return out;
}

std::array<int64_t, kNumComponents> FineSetting::Offsets(int64_t delta_d) const {
  std::array<int64_t, kNumComponents> out{};
  for (int c = 0; c < kNumComponents; ++c) {
    const int64_t scaled = half_steps_[static_cast<size_t>(c)] * delta_d;
    if (scaled % 2 != 0) {
      throw Error(ErrorCode::kInvalidSetting,
                  Name() + " needs an even delta_d (got " +
                      std::to_string(delta_d) + ")");
    }
    out[static_cast<size_t>(c)] = scaled / 2;
  }
  return out;
}

RankSchedule AssembleSchedule(const CoarseAllocation& coarse,
                              const StagePartition& partition) {
  if (static_cast<int64_t>(coarse.stage_ranks.size()) != partition.num_stages()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(coarse.stage_ranks.size()) + " stage ranks for " +
                    std::to_string(partition.num_stages()) + " stages");
  }
  RankSchedule schedule;
  schedule.layers.resize(static_cast<size_t>(partition.num_layers()));
  schedule.provenance.coarse_base.resize(schedule.layers.size());
  for (size_t i = 0; i < partition.stages().size(); ++i) {
    for (int64_t layer : partition.stages()[i].members) {
      schedule.layers[static_cast<size_t>(layer - 1)] =
          ComponentRanks::Uniform(coarse.stage_ranks[i]);
      schedule.provenance.coarse_base[static_cast<size_t>(layer - 1)] =
          coarse.stage_ranks[i];
    }
  }
  schedule.provenance.partition_id = partition.Id();
  schedule.provenance.stage_ranks = coarse.stage_ranks;
  schedule.provenance.setting = "none";
  return schedule;
}

RankSchedule RefineSchedule(const RankSchedule& coarse_schedule,
                            const FineSetting& setting, int64_t delta_d) {
  if (!coarse_schedule.IsCoarse() || coarse_schedule.provenance.setting != "none") {
    throw Error(ErrorCode::kAlreadyRefined,
                "schedule is already fine-grained (setting \"" +
                    coarse_schedule.provenance.setting + "\")");
  }
  if (delta_d < 1) {
    throw Error(ErrorCode::kInvalidArgument, "delta_d must be >= 1");
  }
  const auto offsets = setting.Offsets(delta_d);
  RankSchedule out = coarse_schedule;
  if (out.provenance.coarse_base.size() != out.layers.size()) {
    out.provenance.coarse_base.clear();
    for (const ComponentRanks& layer : out.layers) {
      out.provenance.coarse_base.push_back(layer[ComponentKind::kQ]);
    }
  }
  for (size_t l = 0; l < out.layers.size(); ++l) {
    for (ComponentKind kind : kAllComponents) {
      const int64_t value = out.layers[l][kind] + offsets[ComponentIndex(kind)];
      if (value < 1) {
        throw Error(ErrorCode::kUnderflow,
                    "layer " + std::to_string(l + 1) + " component " +
                        std::string(ComponentName(kind)) + " would get rank " +
                        std::to_string(value));
      }
      out.layers[l][kind] = value;
    }
  }
  out.provenance.setting = setting.Name();
  out.provenance.delta_d = delta_d;
  return out;
}

RankSchedule RefineFine(const CoarseAllocation& coarse,
                        const StagePartition& partition,
                        const FineSetting& setting, int64_t delta_d) {
  return RefineSchedule(AssembleSchedule(coarse, partition), setting, delta_d);
}

Json AllocationReportJson(const CoarseAllocation& coarse,
                          const StagePartition& partition,
                          const AllocatorParams& params, int64_t num_layers) {
  Json json = Json::object();
  json["params"] = {{"r_standard", params.r_standard},
                    {"delta_d", params.delta_d},
                    {"max_outer_iterations", params.max_outer_iterations}};
  json["num_layers"] = num_layers;
  json["partition_id"] = partition.Id();
  json["stage_sizes"] = partition.sizes();
  json["stage_ranks"] = coarse.stage_ranks;
  json["rank_sum"] = coarse.rank_sum;
  json["rank_cap"] = params.r_standard * num_layers;
  json["iterations_used"] = coarse.iterations_used;
  Json trace = Json::array();
  for (const AllocationStep& step : coarse.trace) {
    trace.push_back({{"ranks", step.ranks}, {"n_remain", step.n_remain}});
  }
  json["trace"] = std::move(trace);
  return json;
}

}  // namespace hydra
