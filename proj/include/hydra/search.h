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

#ifndef HYDRA_SEARCH_H_
#define HYDRA_SEARCH_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hydra/allocator.h"
#include "hydra/core.h"
#include "hydra/error.h"
#include "hydra/metrics.h"
#include "hydra/oracle.h"
#include "hydra/partitioner.h"
#include "hydra/perfmodel.h"

namespace hydra {

struct ProposalOptions {
  // When set, roughly half the candidates get a random preset fine setting.
  bool allow_fine = true;
  // Sampling attempts per requested candidate before giving up.
  int64_t attempts_per_candidate = 50;
};

// Samples stage ranks with R_1 >= 1, R_{i+1} >= R_i + delta_d and
// sum_i R_i |S_i| <= r_standard * N_l, optionally refines them, and keeps
// the distinct schedules that pass Validate. May return fewer than `count`
// when the feasible region is small. Throws kBudgetTooSmall when no stage
// rank vector fits.
std::vector<RankSchedule> ProposeCandidates(const StagePartition& partition,
                                            const ModelShape& shape,
                                            const AllocatorParams& params,
                                            int64_t count, uint64_t seed,
                                            const ProposalOptions& options = {});

// An oracle error carrying the schedule it was raised for.
class OracleError : public Error {
 public:
  OracleError(const std::string& message, RankSchedule schedule)
      : Error(ErrorCode::kOracleFailure, message), schedule_(std::move(schedule)) {}
  const RankSchedule& schedule() const { return schedule_; }

 private:
  RankSchedule schedule_;
};

struct SearchOptions {
  int64_t max_iters = 3;
  int64_t batch = 8;
  // Fresh proposals per iteration from which the batch is picked.
  int64_t pool_size = 64;
  uint64_t seed = 42;
  MetricWeights weights = EqualNormalizedWeights();
  ProposalOptions proposal;
  // Iterations stay random until this many evaluations exist.
  int64_t min_train_pairs = 10;
  // False gives the random baseline: same pools, no ranking.
  bool guided = true;
  PerfTrainOptions perf;
  // JSONL log, one line per evaluation. With `resume`, scores already in
  // the log are reused instead of calling the oracle again.
  std::optional<std::filesystem::path> log_path;
  bool resume = false;
};

struct Evaluation {
  int64_t iter = 0;
  RankSchedule schedule;
  MetricVector metrics{};
  double scalar = 0.0;
};

struct SearchState {
  std::vector<Evaluation> evaluated;
  std::optional<PerfModel> model;
  int64_t iteration = 0;
  // Index into `evaluated` of the best score.
  size_t best_index = 0;
  // Best score after each iteration.
  std::vector<double> best_history;
  int64_t oracle_calls = 0;
  int64_t cache_hits = 0;
  const Evaluation& best() const { return evaluated.at(best_index); }
};

struct SearchResult {
  RankSchedule best;
  SearchState state;
};

// Each iteration draws a candidate pool (the oracle's domain if it has one,
// else ProposeCandidates), drops evaluated or inadmissible schedules, picks
// the top `batch` by performance-model prediction (the first `batch` while
// cold or unguided), scores them with the oracle and retrains the model on
// everything seen. Returns the best oracle-scored schedule. Throws
// OracleError when the oracle fails.
SearchResult RunSearch(const Oracle& oracle, const StagePartition& partition,
                       const ModelShape& shape, const AllocatorParams& params,
                       const SearchOptions& options);

// {"iter", "schedule_hash", "metrics", "scalar"}
Json EvaluationLogLine(const Evaluation& evaluation);

// {"best": <schedule>, "best_hash", "best_metrics", "best_scalar",
//  "oracle_calls", "evaluations", "best_history"}
Json SearchSummaryJson(const SearchResult& result);

}  // namespace hydra

#endif  // HYDRA_SEARCH_H_
