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

#include "hydra/oracle.h"

#include <algorithm>
#include <cmath>

#include "hydra/error.h"
#include "hydra/rng.h"
#include "hydra/schedule_io.h"

namespace hydra {

namespace {

// How strongly each metric follows the latent quality.
constexpr MetricVector kSensitivity = {0.10, 0.08, 0.04, 0.02, 0.02, 0.03};

double MeanRank(const ComponentRanks& ranks) {
  return static_cast<double>(ranks.Sum()) / kNumComponents;
}

}  // namespace

SyntheticOracle::SyntheticOracle(ModelShape shape, int64_t r_standard,
                                 SyntheticOracleOptions options)
    : shape_(shape), budget_(shape, r_standard), options_(options) {}

double SyntheticOracle::Quality(const RankSchedule& schedule) const {
  const double use = static_cast<double>(ParamCount(schedule, shape_)) /
                     static_cast<double>(budget_.param_cap());
  const auto n = static_cast<size_t>(schedule.num_layers());
  double monotone = 1.0;
  if (n > 1) {
    // a rise counts fully, a flat step half
    double ok = 0.0;
    for (size_t l = 1; l < n; ++l) {
      const double prev = MeanRank(schedule.layers[l - 1]);
      const double cur = MeanRank(schedule.layers[l]);
      ok += cur > prev ? 1.0 : (cur == prev ? 0.5 : 0.0);
    }
    monotone = ok / static_cast<double>(n - 1);
  }
  double boost = 0.0;
  for (const auto& layer : schedule.layers) {
    boost += static_cast<double>(layer[ComponentKind::kUp]) -
             0.25 * static_cast<double>(layer[ComponentKind::kV] +
                                        layer[ComponentKind::kO] +
                                        layer[ComponentKind::kDown] +
                                        layer[ComponentKind::kGate]);
  }
  boost /= static_cast<double>(n) * static_cast<double>(budget_.r_standard());
  const double width = std::max(options_.up_boost_target, 1e-3);
  const double dev = (boost - options_.up_boost_target) / width;
  const double up = std::exp(-dev * dev);
  return 0.6 * std::min(use, 1.0) + 0.25 * monotone + 0.15 * up;
}

MetricVector SyntheticOracle::Evaluate(const RankSchedule& schedule) const {
  const double q = Quality(schedule);
  const std::string hash = ScheduleHash(schedule);
  Rng rng(MixSeed(options_.seed, std::stoull(hash, nullptr, 16)));
  MetricVector out{};
  for (int k = 0; k < kNumMetrics; ++k) {
    out[k] = kReferenceMetrics[k] *
             (1.0 + kSensitivity[k] * (q - 0.5) + options_.noise * rng.Normal());
  }
  return out;
}

ToyTrainerOracle::ToyTrainerOracle(ToyTrainerConfig config)
    : config_(std::move(config)) {}

MetricVector ToyTrainerOracle::Evaluate(const RankSchedule& schedule) const {
  ToyTrainerConfig config = config_;
  config.schedule = schedule;
  const double loss = TrainToyModel(config).heldout_loss;
  MetricVector out{};
  for (int k = 0; k < kNumMetrics; ++k) {
    out[k] = kReferenceMetrics[k] * std::exp(-loss);
  }
  return out;
}

ReplayOracle::ReplayOracle(std::span<const PerfExample> examples)
    : examples_(examples.begin(), examples.end()) {
  for (size_t i = 0; i < examples_.size(); ++i) {
    const std::string hash = ScheduleHash(examples_[i].schedule);
    if (!index_.emplace(hash, i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "replay table lists schedule " + hash + " twice");
    }
  }
}

MetricVector ReplayOracle::Evaluate(const RankSchedule& schedule) const {
  const std::string hash = ScheduleHash(schedule);
  auto it = index_.find(hash);
  if (it == index_.end()) {
    throw Error(ErrorCode::kOracleFailure,
                "replay table has no entry for schedule " + hash);
  }
  return examples_[it->second].metrics;
}

std::vector<RankSchedule> ReplayOracle::Domain() const {
  std::vector<RankSchedule> out;
  for (const auto& ex : examples_) out.push_back(ex.schedule);
  return out;
}

}  // namespace hydra
