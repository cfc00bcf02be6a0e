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

#ifndef HYDRA_ORACLE_H_
#define HYDRA_ORACLE_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hydra/core.h"
#include "hydra/metrics.h"
#include "hydra/perfmodel.h"
#include "hydra/toy_model.h"

namespace hydra {

// Scores a schedule. Implementations are deterministic for fixed
// construction arguments.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::string Name() const = 0;
  virtual MetricVector Evaluate(const RankSchedule& schedule) const = 0;
  // A closed set of schedules the oracle can score, or empty when it scores
  // any schedule.
  virtual std::vector<RankSchedule> Domain() const { return {}; }
};

struct SyntheticOracleOptions {
  uint64_t seed = 42;
  // Relative standard deviation of the per-schedule noise.
  double noise = 0.001;
  // Preferred (Up - mean(V, O, Down, Gate)) / r_standard.
  double up_boost_target = 2.0 / 128.0;
};

// Closed-form stand-in for benchmark scores. A latent quality in [0, 1]
// combines adapter budget use (param_count / C), how often the mean layer
// rank rises with depth (a flat step counts half), and closeness of the Up
// boost to a target;
// each metric is the reference score scaled around that quality, plus noise
// seeded by (seed, schedule hash).
class SyntheticOracle : public Oracle {
 public:
  SyntheticOracle(ModelShape shape, int64_t r_standard,
                  SyntheticOracleOptions options = {});
  std::string Name() const override { return "synthetic"; }
  MetricVector Evaluate(const RankSchedule& schedule) const override;
  // Noise-free latent quality.
  double Quality(const RankSchedule& schedule) const;

 private:
  ModelShape shape_;
  Budget budget_;
  SyntheticOracleOptions options_;
};

// Trains the toy LoRA transformer under the schedule and maps the held-out
// loss L to reference * exp(-L).
class ToyTrainerOracle : public Oracle {
 public:
  explicit ToyTrainerOracle(ToyTrainerConfig config);
  std::string Name() const override { return "toy-trainer"; }
  MetricVector Evaluate(const RankSchedule& schedule) const override;

 private:
  ToyTrainerConfig config_;
};

// Lookup table keyed by schedule hash. Unknown schedules throw
// kOracleFailure.
class ReplayOracle : public Oracle {
 public:
  explicit ReplayOracle(std::span<const PerfExample> examples);
  std::string Name() const override { return "replay"; }
  MetricVector Evaluate(const RankSchedule& schedule) const override;
  std::vector<RankSchedule> Domain() const override;

 private:
  std::vector<PerfExample> examples_;
  std::map<std::string, size_t> index_;
};

}  // namespace hydra

#endif  // HYDRA_ORACLE_H_
