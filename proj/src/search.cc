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

#include "hydra/search.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "hydra/rng.h"
#include "hydra/schedule_io.h"
#include "spdlog/spdlog.h"

namespace hydra {

namespace {

std::vector<int64_t> SampleStageRanks(std::span<const int64_t> sizes,
                                      int64_t rank_cap, int64_t delta_d,
                                      Rng& rng) {
  const auto t = sizes.size();
  // suffix[i] = sum_{j >= i} |S_j|; lift[i] = sum_{j > i} |S_j| (j - i) delta_d,
  // the least extra rank the later stages need on top of R_i.
  std::vector<int64_t> suffix(t + 1, 0);
  std::vector<int64_t> lift(t + 1, 0);
  for (size_t i = t; i-- > 0;) {
    suffix[i] = suffix[i + 1] + sizes[i];
    lift[i] = lift[i + 1] + suffix[i + 1] * delta_d;
  }
  std::vector<int64_t> ranks(t);
  int64_t remaining = rank_cap;
  int64_t lo = 1;
  for (size_t i = 0; i < t; ++i) {
    const int64_t hi = (remaining - lift[i]) / suffix[i];
    ranks[i] = rng.UniformInt(lo, hi);
    remaining -= ranks[i] * sizes[i];
    lo = ranks[i] + delta_d;
  }
  return ranks;
}

std::map<std::string, MetricVector> LoadLogCache(const std::filesystem::path& path) {
  std::map<std::string, MetricVector> cache;
  std::ifstream in(path);
  if (!in) return cache;
  std::string line;
  int64_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      cache[j.at("schedule_hash").get<std::string>()] =
          j.at("metrics").get<MetricVector>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + " line " +
                                         std::to_string(line_number) + ": " + e.what());
    }
  }
  return cache;
}

}  // namespace

std::vector<RankSchedule> ProposeCandidates(const StagePartition& partition,
                                            const ModelShape& shape,
                                            const AllocatorParams& params,
                                            int64_t count, uint64_t seed,
                                            const ProposalOptions& options) {
  if (count <= 0) return {};
  if (partition.num_layers() != shape.num_layers()) {
    throw Error(ErrorCode::kShapeMismatch,
                "partition covers " + std::to_string(partition.num_layers()) +
                    " layers, shape has " + std::to_string(shape.num_layers()));
  }
  if (params.delta_d < 0) {
    throw Error(ErrorCode::kInvalidArgument, "delta_d must be non-negative");
  }
  const std::vector<int64_t> sizes = partition.sizes();
  const int64_t rank_cap = params.r_standard * shape.num_layers();
  int64_t lift = 0;
  for (size_t i = 0; i < sizes.size(); ++i) {
    lift += sizes[i] * static_cast<int64_t>(i) * params.delta_d;
  }
  if (rank_cap - lift < shape.num_layers()) {
    throw Error(ErrorCode::kBudgetTooSmall,
                "no increasing stage ranks fit under the rank cap " +
                    std::to_string(rank_cap));
  }

  std::vector<int> presets = {1, 2, 3, 5};
  if (params.delta_d % 2 == 0) presets.insert(presets.begin() + 3, 4);

  const Budget budget(shape, params.r_standard);
  Rng rng(MixSeed(seed, 0xca9d));
  std::vector<RankSchedule> out;
  std::set<std::string> seen;
  const int64_t max_attempts = count * std::max<int64_t>(1, options.attempts_per_candidate);
  for (int64_t attempt = 0;
       attempt < max_attempts && static_cast<int64_t>(out.size()) < count;
       ++attempt) {
    CoarseAllocation coarse;
    coarse.stage_ranks = SampleStageRanks(sizes, rank_cap, params.delta_d, rng);
    for (size_t i = 0; i < sizes.size(); ++i) {
      coarse.rank_sum += coarse.stage_ranks[i] * sizes[i];
    }
    RankSchedule schedule = AssembleSchedule(coarse, partition);
    if (options.allow_fine && rng.Uniform() < 0.5) {
      const int preset = presets[static_cast<size_t>(
          rng.UniformInt(0, static_cast<int64_t>(presets.size()) - 1))];
      try {
        schedule = RefineSchedule(schedule, FineSetting::Preset(preset), params.delta_d);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnderflow) throw;
        continue;
      }
    }
    if (!Validate(schedule, shape, budget).admissible()) continue;
    if (!seen.insert(ScheduleHash(schedule)).second) continue;
    out.push_back(std::move(schedule));
  }
  if (static_cast<int64_t>(out.size()) < count) {
    spdlog::debug("proposed {} of {} requested candidates", out.size(), count);
  }
  return out;
}

Json EvaluationLogLine(const Evaluation& evaluation) {
  return Json{{"iter", evaluation.iter},
              {"schedule_hash", ScheduleHash(evaluation.schedule)},
              {"metrics", evaluation.metrics},
              {"scalar", evaluation.scalar}};
}

SearchResult RunSearch(const Oracle& oracle, const StagePartition& partition,
                       const ModelShape& shape, const AllocatorParams& params,
                       const SearchOptions& options) {
  if (options.max_iters < 1 || options.batch < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_iters and batch must be >= 1");
  }
  std::map<std::string, MetricVector> cache;
  if (options.log_path && options.resume) cache = LoadLogCache(*options.log_path);
  std::ofstream log;
  if (options.log_path) {
    if (options.log_path->has_parent_path()) {
      std::filesystem::create_directories(options.log_path->parent_path());
    }
    log.open(*options.log_path, std::ios::trunc);
    if (!log) {
      throw Error(ErrorCode::kIo, "cannot write " + options.log_path->string());
    }
  }

  const Budget budget(shape, params.r_standard);
  const std::vector<RankSchedule> domain = oracle.Domain();
  SearchState state;
  std::set<std::string> seen;

  for (int64_t iter = 1; iter <= options.max_iters; ++iter) {
    const uint64_t iter_seed = MixSeed(options.seed, static_cast<uint64_t>(iter));
    std::vector<RankSchedule> pool;
    if (!domain.empty()) {
      pool = domain;
      Rng rng(iter_seed);
      rng.Shuffle(pool);
    } else {
      pool = ProposeCandidates(partition, shape, params, options.pool_size,
                               iter_seed, options.proposal);
    }
    std::erase_if(pool, [&](const RankSchedule& s) {
      return s.num_layers() != shape.num_layers() || seen.count(ScheduleHash(s)) > 0 ||
             !Validate(s, shape, budget).admissible();
    });

    std::vector<size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    if (options.guided && state.model) {
      std::vector<double> predicted(pool.size());
      for (size_t i = 0; i < pool.size(); ++i) {
        predicted[i] = Scalarize(state.model->Predict(pool[i]), options.weights);
      }
      std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return predicted[a] > predicted[b];
      });
    }
    order.resize(std::min<size_t>(order.size(), static_cast<size_t>(options.batch)));

    for (size_t i : order) {
      Evaluation ev;
      ev.iter = iter;
      ev.schedule = pool[i];
      const std::string hash = ScheduleHash(ev.schedule);
      if (auto it = cache.find(hash); it != cache.end()) {
        ev.metrics = it->second;
        ++state.cache_hits;
      } else {
        try {
          ev.metrics = oracle.Evaluate(ev.schedule);
        } catch (const std::exception& e) {
          throw OracleError(oracle.Name() + " oracle failed on schedule " + hash +
                                ": " + e.what(),
                            ev.schedule);
        }
        ++state.oracle_calls;
      }
      ev.scalar = Scalarize(ev.metrics, options.weights);
      if (log.is_open()) log << EvaluationLogLine(ev).dump() << '\n';
      seen.insert(hash);
      state.evaluated.push_back(std::move(ev));
      const size_t idx = state.evaluated.size() - 1;
      if (idx == 0 || state.evaluated[idx].scalar > state.best().scalar) {
        state.best_index = idx;
      }
    }
    if (log.is_open()) log.flush();

    if (options.guided &&
        static_cast<int64_t>(state.evaluated.size()) >= options.min_train_pairs &&
        state.evaluated.size() >= 10) {
      std::vector<PerfExample> data;
      for (const auto& ev : state.evaluated) data.push_back({ev.schedule, ev.metrics});
      PerfTrainOptions perf = options.perf;
      perf.seed = MixSeed(options.perf.seed, iter_seed);
      state.model = TrainPerfModel(data, params.r_standard, perf).model;
    }
    state.iteration = iter;
    if (!state.evaluated.empty()) state.best_history.push_back(state.best().scalar);
    spdlog::debug("search iter {}: {} evaluated, best {:.6f}", iter,
                 state.evaluated.size(),
                 state.evaluated.empty() ? 0.0 : state.best().scalar);
  }
  if (state.evaluated.empty()) {
    throw Error(ErrorCode::kEmptyInput, "search found no admissible candidate");
  }
  RankSchedule best = state.best().schedule;
  return {std::move(best), std::move(state)};
}

Json SearchSummaryJson(const SearchResult& result) {
  const Evaluation& best = result.state.best();
  return Json{{"best", ScheduleToJson(result.best)},
              {"best_hash", ScheduleHash(result.best)},
              {"best_metrics", best.metrics},
              {"best_scalar", best.scalar},
              {"oracle_calls", result.state.oracle_calls},
              {"evaluations", result.state.evaluated.size()},
              {"best_history", result.state.best_history}};
}

}  // namespace hydra
