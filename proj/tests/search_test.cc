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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "hydra/export.h"
#include "hydra/presets.h"
#include "hydra/schedule_io.h"

namespace hydra {
namespace {

const ModelPreset& Mobile() {
  static const ModelPreset p = FindModelPreset("mobilellama-1.4b");
  return p;
}

const StagePartition& Config4Partition() {
  static const StagePartition p = FindCoarsePreset("paper-config4").partition;
  return p;
}

std::vector<PerfExample> StageConfigExamples() {
  return DatasetFromJson(ReadJsonFile(std::filesystem::path(HYDRA_TEST_DATA_DIR) /
                                      "stage_configs_replay.json"));
}

// Mean layer rank must be strictly increasing across consecutive stages and
// the coarse rank sum within the cap.
void ExpectStageOrdering(const RankSchedule& s, const StagePartition& partition,
                         int64_t delta_d, int64_t rank_cap) {
  std::vector<int64_t> base(s.provenance.stage_ranks);
  ASSERT_EQ(static_cast<int64_t>(base.size()), partition.num_stages());
  int64_t sum = 0;
  for (int64_t i = 0; i < partition.num_stages(); ++i) {
    EXPECT_GE(base[i], 1);
    if (i > 0) EXPECT_GE(base[i], base[i - 1] + delta_d);
    sum += base[i] * partition.stages()[i].size();
  }
  EXPECT_LE(sum, rank_cap);
  EXPECT_EQ(RankTotal(s), sum);
}

TEST(ProposeCandidatesTest, ZeroCountIsEmpty) {
  EXPECT_TRUE(ProposeCandidates(Config4Partition(), Mobile().shape, {}, 0, 1).empty());
}

TEST(ProposeCandidatesTest, AdmissibleOrderedAndDistinct) {
  const Budget budget(Mobile().shape, 128);
  const auto props = ProposeCandidates(Config4Partition(), Mobile().shape, {}, 1000, 7);
  ASSERT_EQ(props.size(), 1000u);
  std::set<std::string> hashes;
  int fine = 0;
  for (const auto& s : props) {
    EXPECT_TRUE(Validate(s, Mobile().shape, budget).admissible());
    ExpectStageOrdering(s, Config4Partition(), 2, budget.rank_cap());
    EXPECT_TRUE(hashes.insert(ScheduleHash(s)).second);
    if (!s.IsCoarse()) ++fine;
  }
  EXPECT_GT(fine, 300);
  EXPECT_LT(fine, 700);
}

TEST(ProposeCandidatesTest, ToyPresetReproducible) {
  const ModelPreset toy = FindModelPreset("toy-6");
  const StagePartition part = StagePartition::Contiguous(std::vector<int64_t>{2, 2, 2});
  const AllocatorParams params{16, 2, 10'000};
  const auto a = ProposeCandidates(part, toy.shape, params, 50, 3);
  const auto b = ProposeCandidates(part, toy.shape, params, 50, 3);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, ProposeCandidates(part, toy.shape, params, 50, 4));
}

TEST(ProposeCandidatesTest, BudgetTooSmall) {
  const StagePartition part = StagePartition::Contiguous(std::vector<int64_t>{2, 2, 2});
  try {
    ProposeCandidates(part, ModelShape(6, 8, 16), {2, 2, 10'000}, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetTooSmall);
  }
}

TEST(ScalarizeTest, WeightsAndParsing) {
  const MetricVector m = {1200.88, 48.45, 40.75, 83.97, 55.64, 51.78};
  EXPECT_EQ(Scalarize(m, OneHotWeights(1)), 48.45);
  EXPECT_EQ(Scalarize(m, MetricWeights{}), 0.0);
  EXPECT_NEAR(Scalarize(kReferenceMetrics, EqualNormalizedWeights()), 1.0, 1e-12);
  EXPECT_GT(Scalarize(m, EqualNormalizedWeights()),
            Scalarize(kReferenceMetrics, EqualNormalizedWeights()));
  EXPECT_EQ(ParseScalarizer("MMB"), OneHotWeights(1));
  EXPECT_EQ(ParseScalarizer("sqa-i"), OneHotWeights(5));
  EXPECT_EQ(ParseScalarizer("equal"), EqualNormalizedWeights());
  EXPECT_EQ(ParseScalarizer("1,0,0,0,0,2"), (MetricWeights{1, 0, 0, 0, 0, 2}));
  EXPECT_THROW(ParseScalarizer("bleu"), Error);
  EXPECT_THROW(ParseScalarizer("1,2,3"), Error);
}

SearchOptions SmallOptions(uint64_t seed) {
  SearchOptions o;
  o.seed = seed;
  return o;
}

TEST(RunSearchTest, SingleIterationMatchesRandom) {
  const SyntheticOracle oracle(Mobile().shape, 128);
  SearchOptions o = SmallOptions(5);
  o.max_iters = 1;
  const auto guided = RunSearch(oracle, Config4Partition(), Mobile().shape, {}, o);
  o.guided = false;
  const auto random = RunSearch(oracle, Config4Partition(), Mobile().shape, {}, o);
  EXPECT_EQ(guided.best, random.best);
  EXPECT_FALSE(guided.state.model.has_value());
}

TEST(RunSearchTest, StateInvariants) {
  const SyntheticOracle oracle(Mobile().shape, 128);
  const Budget budget(Mobile().shape, 128);
  const SearchOptions o = SmallOptions(9);
  const auto r = RunSearch(oracle, Config4Partition(), Mobile().shape, {}, o);
  EXPECT_LE(r.state.oracle_calls, o.max_iters * o.batch);
  EXPECT_EQ(r.state.oracle_calls, static_cast<int64_t>(r.state.evaluated.size()));
  ASSERT_EQ(r.state.best_history.size(), static_cast<size_t>(o.max_iters));
  for (size_t i = 1; i < r.state.best_history.size(); ++i) {
    EXPECT_GE(r.state.best_history[i], r.state.best_history[i - 1]);
  }
  std::set<std::string> hashes;
  double best = -INFINITY;
  for (const auto& e : r.state.evaluated) {
    EXPECT_TRUE(Validate(e.schedule, Mobile().shape, budget).admissible());
    EXPECT_TRUE(hashes.insert(ScheduleHash(e.schedule)).second);
    best = std::max(best, e.scalar);
  }
  EXPECT_EQ(r.state.best().scalar, best);
  EXPECT_EQ(r.best, r.state.best().schedule);
  EXPECT_TRUE(r.state.model.has_value());
}

TEST(RunSearchTest, ReplayFindsConfig4) {
  const auto examples = StageConfigExamples();
  const ReplayOracle oracle(examples);
  SearchOptions o = SmallOptions(42);
  o.weights = ParseScalarizer("mmb");
  o.batch = 4;
  const auto part = StagePartition::Contiguous(std::vector<int64_t>{24});
  const auto a = RunSearch(oracle, part, Mobile().shape, {}, o);
  EXPECT_EQ(a.best, examples[3].schedule);
  // Config2 and Config3 exceed the rank cap and are never scored.
  EXPECT_EQ(a.state.oracle_calls, 2);
  const auto b = RunSearch(oracle, part, Mobile().shape, {}, o);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(SearchSummaryJson(a).dump(), SearchSummaryJson(b).dump());
}

class FailingOracle : public Oracle {
 public:
  std::string Name() const override { return "failing"; }
  MetricVector Evaluate(const RankSchedule&) const override {
    throw std::runtime_error("backend unavailable");
  }
};

TEST(RunSearchTest, OracleFailureCarriesSchedule) {
  try {
    RunSearch(FailingOracle(), Config4Partition(), Mobile().shape, {}, SmallOptions(1));
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOracleFailure);
    EXPECT_EQ(e.schedule().num_layers(), 24);
    EXPECT_NE(std::string(e.what()).find("backend unavailable"), std::string::npos);
  }
}

TEST(RunSearchTest, ResumeReusesLoggedScores) {
  const auto log = std::filesystem::temp_directory_path() / "hydra_search_resume.jsonl";
  std::filesystem::remove(log);
  const SyntheticOracle oracle(Mobile().shape, 128);
  SearchOptions o = SmallOptions(11);
  o.max_iters = 2;
  o.log_path = log;
  const auto first = RunSearch(oracle, Config4Partition(), Mobile().shape, {}, o);
  const std::string text = ReadTextFile(log);
  EXPECT_EQ(static_cast<int64_t>(std::count(text.begin(), text.end(), '\n')),
            first.state.oracle_calls);
  const Json line = Json::parse(text.substr(0, text.find('\n')));
  for (const char* key : {"iter", "schedule_hash", "metrics", "scalar"}) {
    EXPECT_TRUE(line.contains(key)) << key;
  }
  o.resume = true;
  const auto second = RunSearch(FailingOracle(), Config4Partition(), Mobile().shape, {}, o);
  EXPECT_EQ(second.state.oracle_calls, 0);
  EXPECT_EQ(second.state.cache_hits, first.state.oracle_calls);
  EXPECT_EQ(second.best, first.best);
  std::filesystem::remove(log);
}

TEST(SyntheticOracleTest, DeterministicAndOrdered) {
  const SyntheticOracle oracle(Mobile().shape, 128);
  const RankSchedule uniform = RankSchedule::Uniform(24, 128);
  EXPECT_EQ(oracle.Evaluate(uniform), oracle.Evaluate(uniform));
  const SyntheticOracle other(Mobile().shape, 128, {.seed = 7});
  EXPECT_NE(oracle.Evaluate(uniform), other.Evaluate(uniform));
  const RankSchedule config4 = AblationConfigSchedule(4);
  const RankSchedule config1 = AblationConfigSchedule(1);
  EXPECT_GT(oracle.Quality(config4), oracle.Quality(uniform));
  EXPECT_GT(oracle.Quality(config4), oracle.Quality(config1));
  const CoarsePreset p = FindCoarsePreset("paper-config4");
  EXPECT_GT(oracle.Quality(RefineFine(p.allocation, p.partition, FineSetting::Preset(1), 2)),
            oracle.Quality(config4));
  const auto weights = EqualNormalizedWeights();
  EXPECT_GT(Scalarize(oracle.Evaluate(config4), weights),
            Scalarize(oracle.Evaluate(uniform), weights));
  for (double v : oracle.Evaluate(RankSchedule::Uniform(24, 1))) EXPECT_TRUE(std::isfinite(v));
}

TEST(ReplayOracleTest, LookupAndErrors) {
  auto examples = StageConfigExamples();
  const ReplayOracle oracle(examples);
  EXPECT_EQ(oracle.Evaluate(examples[2].schedule), examples[2].metrics);
  EXPECT_EQ(oracle.Domain().size(), 4u);
  try {
    oracle.Evaluate(RankSchedule::Uniform(24, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOracleFailure);
  }
  examples.push_back(examples[0]);
  EXPECT_THROW(ReplayOracle{examples}, Error);
}

TEST(ToyTrainerOracleTest, FiniteAndDeterministic) {
  ToyTrainerConfig config;
  config.model = ToyConfigFor(FindModelPreset("toy-6"), 3);
  config.steps = 3;
  config.batch = 4;
  config.heldout_batch = 4;
  const ToyTrainerOracle oracle(config);
  const RankSchedule s = RankSchedule::Uniform(6, 4);
  const MetricVector a = oracle.Evaluate(s);
  EXPECT_EQ(a, oracle.Evaluate(s));
  for (int k = 0; k < kNumMetrics; ++k) {
    EXPECT_GT(a[k], 0.0);
    EXPECT_LT(a[k], kReferenceMetrics[k]);
  }
}

TEST(ExportTest, DefaultRankTiesGoToSmaller) {
  RankSchedule s = RankSchedule::Uniform(2, 8);
  for (ComponentKind c : {ComponentKind::kQ, ComponentKind::kK, ComponentKind::kV,
                          ComponentKind::kO}) {
    s.layers[0][c] = 4;
    s.layers[1][c] = 4;
  }
  s.layers[0][ComponentKind::kUp] = 4;
  s.layers[1][ComponentKind::kUp] = 4;
  EXPECT_EQ(DefaultRank(s), 4);
  s.layers[1][ComponentKind::kUp] = 8;
  // 7 entries each
  EXPECT_EQ(DefaultRank(s), 4);
  EXPECT_THROW(DefaultRank(RankSchedule{}), Error);
}

TEST(ExportTest, Config4Setting1Pattern) {
  const CoarsePreset p = FindCoarsePreset("paper-config4");
  const RankSchedule s = RefineFine(p.allocation, p.partition, FineSetting::Preset(1), 2);
  const Json j = RankPatternJson(s);
  // 131 fills four components of the twelve last-stage layers
  EXPECT_EQ(j["default_rank"], 131);
  EXPECT_EQ(j["num_layers"], 24);
  EXPECT_EQ(j["pattern"]["layers.0.q_proj"], 122);
  EXPECT_EQ(j["pattern"]["layers.0.up_proj"], 126);
  EXPECT_EQ(j["pattern"]["layers.0.v_proj"], 124);
  EXPECT_EQ(j["pattern"]["layers.9.up_proj"], 128);
  EXPECT_FALSE(j["pattern"].contains("layers.23.gate_proj"));
  EXPECT_EQ(j["pattern"]["layers.23.up_proj"], 133);
  const RankSchedule back = ScheduleFromRankPattern(j);
  EXPECT_EQ(back.layers, s.layers);
}

TEST(ExportTest, RoundTripOnProposals) {
  for (const auto& s : ProposeCandidates(Config4Partition(), Mobile().shape, {}, 100, 2)) {
    const Json j = Json::parse(DumpJson(RankPatternJson(s)));
    EXPECT_EQ(ScheduleFromRankPattern(j).layers, s.layers);
    EXPECT_EQ(j["schedule_hash"], ScheduleHash(s));
  }
}

TEST(ExportTest, RejectsMalformedPatterns) {
  const Json good = RankPatternJson(RankSchedule::Uniform(2, 8));
  Json bad = good;
  bad["pattern"]["layers.0.lm_head"] = 4;
  EXPECT_THROW(ScheduleFromRankPattern(bad), Error);
  bad = good;
  bad["pattern"]["layers.0.q_proj"] = 0;
  EXPECT_THROW(ScheduleFromRankPattern(bad), Error);
  bad = good;
  bad["pattern"]["layers.2.q_proj"] = 4;
  EXPECT_THROW(ScheduleFromRankPattern(bad), Error);
  bad = good;
  bad["pattern"]["layers.x.q_proj"] = 4;
  EXPECT_THROW(ScheduleFromRankPattern(bad), Error);
  EXPECT_EQ(ScheduleFromRankPattern(good).layers, RankSchedule::Uniform(2, 8).layers);
}

}  // namespace
}  // namespace hydra
