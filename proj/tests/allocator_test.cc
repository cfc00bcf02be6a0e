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

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <numeric>
#include <optional>
#include <random>

#include "hydra/error.h"
#include "hydra/presets.h"

namespace hydra {
namespace {

// Straight replay of the linear-increase loop, written independently of the
// library: nullopt when no pass is admissible.
std::optional<std::vector<int64_t>> ReplayAllocation(const std::vector<int64_t>& sizes,
                                                     int64_t r_standard, int64_t delta_d) {
  int64_t n = 0;
  for (int64_t s : sizes) n += s;
  const int64_t r_init = 2 * ((r_standard - (n - 1)) / 2);
  if (r_standard - (n - 1) < 0 || r_init <= 0) return std::nullopt;
  const int64_t cap = r_standard * n;
  const size_t t = sizes.size();
  std::optional<std::vector<int64_t>> previous;
  for (int64_t r1 = r_init;; ++r1) {
    std::vector<int64_t> ranks(t);
    int64_t used = 0;
    for (size_t i = 0; i + 1 < t; ++i) {
      ranks[i] = r1 + static_cast<int64_t>(i) * delta_d;
      used += ranks[i] * sizes[i];
    }
    if (t == 1) {
      ranks[0] = r1;
    } else {
      const int64_t rest = cap - used;
      // floor division for a possibly negative numerator
      ranks[t - 1] = rest >= 0 ? rest / sizes[t - 1] : -((-rest + sizes[t - 1] - 1) / sizes[t - 1]);
    }
    int64_t total = 0;
    for (size_t i = 0; i < t; ++i) total += ranks[i] * sizes[i];
    const bool stop = cap - total < 0 || (t > 1 && ranks[t - 1] <= ranks[t - 2]);
    if (stop) return previous;
    previous = ranks;
  }
}

TEST(InitialRankTest, Formula) {
  EXPECT_EQ(InitialRank(128, 24), 104);
  EXPECT_EQ(InitialRank(128, 24), 2 * ((128 - 23) / 2));
  EXPECT_EQ(InitialRank(8, 4), 4);
  for (int64_t n : {2, 5, 24}) {
    try {
      InitialRank(n, n);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kBudgetTooSmall);
    }
  }
}

TEST(AllocateCoarseTest, ThreeEqualStages) {
  const std::vector<int64_t> sizes = {2, 2, 2};
  const auto a = AllocateCoarse(StagePartition::Contiguous(sizes), {16, 2, 10'000}, 6);
  EXPECT_EQ(a.stage_ranks, (std::vector<int64_t>{14, 16, 18}));
  EXPECT_EQ(a.rank_sum, 96);
  // R_1 = 10..14 are accepted, R_1 = 15 stops the loop
  ASSERT_EQ(a.trace.size(), 6u);
  EXPECT_EQ(a.trace.front().ranks, (std::vector<int64_t>{10, 12, 26}));
  EXPECT_EQ(a.trace.back().ranks, (std::vector<int64_t>{15, 17, 16}));
}

TEST(AllocateCoarseTest, TwoStages) {
  const std::vector<int64_t> sizes = {2, 2};
  const auto a = AllocateCoarse(StagePartition::Contiguous(sizes), {8, 2, 10'000}, 4);
  EXPECT_EQ(a.stage_ranks, (std::vector<int64_t>{7, 9}));
  EXPECT_EQ(a.rank_sum, 32);
}

TEST(AllocateCoarseTest, SingleStageIsUniformBaseline) {
  const std::vector<int64_t> sizes = {4};
  const auto a = AllocateCoarse(StagePartition::Contiguous(sizes), {8, 2, 10'000}, 4);
  EXPECT_EQ(a.stage_ranks, (std::vector<int64_t>{8}));
}

TEST(AllocateCoarseTest, MobileLlamaPinnedSemantics) {
  const std::vector<int64_t> sizes = {8, 4, 12};
  const auto a = AllocateCoarse(StagePartition::Contiguous(sizes), {128, 2, 10'000}, 24);
  EXPECT_EQ(a.stage_ranks, (std::vector<int64_t>{126, 128, 129}));
  const CoarsePreset shipped = FindCoarsePreset("paper-config4");
  EXPECT_EQ(shipped.allocation.stage_ranks, (std::vector<int64_t>{124, 126, 131}));
  EXPECT_EQ(shipped.partition.sizes(), sizes);
}

TEST(AllocateCoarseTest, MatchesReplayOnRandomInstances) {
  std::mt19937_64 gen(42);
  const auto start = std::chrono::steady_clock::now();
  int compared = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const int t = 1 + static_cast<int>(gen() % 5);
    std::vector<int64_t> sizes(t, 1);
    int64_t n = t;
    const int64_t target = t + static_cast<int64_t>(gen() % (33 - t));
    while (n < target) {
      ++sizes[gen() % t];
      ++n;
    }
    const int64_t r = 1 + static_cast<int64_t>(gen() % 256);
    const int64_t dd = 1 + static_cast<int64_t>(gen() % 4);
    // shuffled membership: the allocator only sees stage sizes
    std::vector<int64_t> layers(n);
    std::iota(layers.begin(), layers.end(), 1);
    std::shuffle(layers.begin(), layers.end(), gen);
    std::vector<Stage> stages;
    size_t pos = 0;
    for (int i = 0; i < t; ++i) {
      Stage s;
      s.members.assign(layers.begin() + pos, layers.begin() + pos + sizes[i]);
      std::sort(s.members.begin(), s.members.end());
      s.centroid = i;
      pos += sizes[i];
      stages.push_back(s);
    }
    const StagePartition partition(stages);
    const auto expected = ReplayAllocation(sizes, r, dd);
    if (!expected) {
      EXPECT_THROW(AllocateCoarse(partition, {r, dd, 10'000}, n), Error);
      continue;
    }
    const auto got = AllocateCoarse(partition, {r, dd, 10'000}, n);
    EXPECT_EQ(got.stage_ranks, *expected) << "r=" << r << " dd=" << dd;
    ++compared;
  }
  EXPECT_GT(compared, 1000);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 10.0);
}

TEST(AllocateCoarseTest, InvariantsAndBudgetMonotonicity) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const int t = 1 + static_cast<int>(gen() % 6);
    std::vector<int64_t> sizes(t);
    int64_t n = 0;
    for (auto& s : sizes) {
      s = 1 + static_cast<int64_t>(gen() % 6);
      n += s;
    }
    const int64_t dd = 1 + static_cast<int64_t>(gen() % 4);
    const int64_t r = n + static_cast<int64_t>(gen() % 200);
    const StagePartition partition = StagePartition::Contiguous(sizes);
    CoarseAllocation a, b;
    try {
      a = AllocateCoarse(partition, {r, dd, 10'000}, n);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kBudgetTooSmall);
      continue;
    }
    EXPECT_LE(a.rank_sum, r * n);
    for (int i = 0; i + 1 < t; ++i) EXPECT_LT(a.stage_ranks[i], a.stage_ranks[i + 1]);
    b = AllocateCoarse(partition, {r + 1 + static_cast<int64_t>(gen() % 8), dd, 10'000}, n);
    for (int i = 0; i < t; ++i) EXPECT_GE(b.stage_ranks[i], a.stage_ranks[i]);
  }
}

TEST(AllocateCoarseTest, IterationCapReported) {
  const std::vector<int64_t> sizes = {2, 2, 2};
  try {
    AllocateCoarse(StagePartition::Contiguous(sizes), {16, 2, 2}, 6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonTermination);
  }
}

TEST(FineSettingTest, Setting1At128) {
  const RankSchedule coarse = RankSchedule::Uniform(1, 128);
  const RankSchedule fine = RefineSchedule(coarse, FineSetting::Preset(1), 2);
  EXPECT_EQ(fine.layers[0].values(),
            (std::array<int64_t, 7>{126, 126, 128, 128, 130, 128, 128}));
  EXPECT_EQ(fine.provenance.setting, "setting1");
  EXPECT_EQ(fine.provenance.coarse_base, (std::vector<int64_t>{128}));
}

TEST(FineSettingTest, AllPresetsOffsets) {
  using A = std::array<int64_t, 7>;
  // Q, K, V, O, Up, Down, Gate with delta_d = 4
  EXPECT_EQ(FineSetting::Preset(1).Offsets(4), (A{-4, -4, 0, 0, 4, 0, 0}));
  EXPECT_EQ(FineSetting::Preset(2).Offsets(4), (A{-4, -4, 0, 0, 4, 4, 0}));
  EXPECT_EQ(FineSetting::Preset(3).Offsets(4), (A{-4, -4, 0, 0, 0, 0, 0}));
  EXPECT_EQ(FineSetting::Preset(4).Offsets(4), (A{-2, -2, 0, 0, 4, 0, 0}));
  EXPECT_EQ(FineSetting::Preset(5).Offsets(4), (A{-4, -4, 0, 0, 8, 0, 0}));
  EXPECT_EQ(FineSetting::None().Offsets(4), (A{}));
  EXPECT_THROW(FineSetting::Preset(4).Offsets(3), Error);
  EXPECT_THROW(FineSetting::Preset(6), Error);
}

TEST(FineSettingTest, ParseNamesAndCustom) {
  EXPECT_EQ(FineSetting::Parse("none").kind(), FineSetting::Kind::kNone);
  EXPECT_EQ(FineSetting::Parse("Setting3").kind(), FineSetting::Kind::kSetting3);
  const FineSetting custom = FineSetting::Parse("custom:Q=-1,K=-0.5,Up=1.5");
  EXPECT_EQ(custom.Offsets(2), (std::array<int64_t, 7>{-2, -1, 0, 0, 3, 0, 0}));
  EXPECT_EQ(FineSetting::Parse(custom.Name()).Offsets(2), custom.Offsets(2));
  for (const char* bad : {"setting9", "custom:X=1", "custom:Q=0.25", "custom:Q"}) {
    EXPECT_THROW(FineSetting::Parse(bad), Error) << bad;
  }
}

TEST(RefineTest, Config4Layer10) {
  const CoarsePreset preset = FindCoarsePreset("paper-config4");
  const RankSchedule fine = RefineFine(preset.allocation, preset.partition,
                                       FineSetting::Preset(1), 2);
  EXPECT_EQ(fine.layers[9].values(),
            (std::array<int64_t, 7>{124, 124, 126, 126, 128, 126, 126}));
  EXPECT_EQ(fine.layers[0].values(),
            (std::array<int64_t, 7>{122, 122, 124, 124, 126, 124, 124}));
  EXPECT_EQ(fine.layers[23].values(),
            (std::array<int64_t, 7>{129, 129, 131, 131, 133, 131, 131}));
}

TEST(RefineTest, UnderflowNamesLayerAndComponent) {
  try {
    RefineSchedule(RankSchedule::Uniform(3, 2), FineSetting::Preset(1), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnderflow);
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("Q"), std::string::npos);
  }
}

TEST(RefineTest, RefusesSecondApplication) {
  const RankSchedule once = RefineSchedule(RankSchedule::Uniform(2, 16), FineSetting::Preset(1), 2);
  try {
    RefineSchedule(once, FineSetting::Preset(1), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAlreadyRefined);
  }
  // a coarse-looking schedule whose provenance records a setting is refused too
  RankSchedule tagged = RankSchedule::Uniform(2, 16);
  tagged.provenance.setting = "setting3";
  EXPECT_THROW(RefineSchedule(tagged, FineSetting::Preset(1), 2), Error);
}

TEST(RefineTest, Setting1NeverRaisesParamsWhenFfnIsNarrow) {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t d = 4 + gen() % 60;
    const int64_t m = 1 + gen() % (3 * d - 1);  // m < 3d
    const int64_t layers = 1 + gen() % 6;
    ModelShape shape(layers, d, m);
    RankSchedule coarse = RankSchedule::Uniform(layers, 1);
    for (auto& l : coarse.layers) l = ComponentRanks::Uniform(3 + gen() % 40);
    const int64_t dd = 1 + gen() % 2;
    const RankSchedule fine = RefineSchedule(coarse, FineSetting::Preset(1), dd);
    EXPECT_LE(ParamCount(fine, shape), ParamCount(coarse, shape));
  }
}

TEST(AssembleTest, ExpandsMembership) {
  const std::vector<int64_t> sizes = {2, 2, 2};
  const StagePartition partition = StagePartition::Contiguous(sizes);
  CoarseAllocation coarse;
  coarse.stage_ranks = {14, 16, 18};
  const RankSchedule s = AssembleSchedule(coarse, partition);
  const int64_t expected[] = {14, 14, 16, 16, 18, 18};
  for (int l = 0; l < 6; ++l) {
    EXPECT_EQ(s.layers[l], ComponentRanks::Uniform(expected[l]));
  }
  EXPECT_EQ(s.provenance.coarse_base, (std::vector<int64_t>{14, 14, 16, 16, 18, 18}));
  EXPECT_EQ(s.provenance.partition_id, partition.Id());

  const StagePartition gapped({Stage{{1, 5}, 2.0}, Stage{{2, 3, 4}, 1.0}});
  CoarseAllocation two;
  two.stage_ranks = {10, 20};
  const RankSchedule g = AssembleSchedule(two, gapped);
  EXPECT_EQ(g.layers[0], ComponentRanks::Uniform(gapped.stages()[0].members[0] == 1 ? 10 : 20));
  EXPECT_EQ(g.layers[0], g.layers[4]);
  EXPECT_NE(g.layers[0], g.layers[1]);

  CoarseAllocation wrong;
  wrong.stage_ranks = {8};
  try {
    AssembleSchedule(wrong, partition);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(AssembleTest, SingleStageUniform) {
  const std::vector<int64_t> sizes = {4};
  CoarseAllocation coarse;
  coarse.stage_ranks = {8};
  RankSchedule s = AssembleSchedule(coarse, StagePartition::Contiguous(sizes));
  EXPECT_EQ(s.layers, RankSchedule::Uniform(4, 8).layers);
}

TEST(AllocationReportTest, ContainsTrace) {
  const std::vector<int64_t> sizes = {2, 2};
  const StagePartition partition = StagePartition::Contiguous(sizes);
  const AllocatorParams params{8, 2, 10'000};
  const auto a = AllocateCoarse(partition, params, 4);
  const Json report = AllocationReportJson(a, partition, params, 4);
  EXPECT_EQ(report["stage_ranks"], Json::parse("[7, 9]"));
  EXPECT_EQ(report["trace"].size(), a.trace.size());
  EXPECT_EQ(report["rank_cap"], 32);
}

}  // namespace
}  // namespace hydra
