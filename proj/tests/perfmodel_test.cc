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

#include "hydra/perfmodel.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "hydra/error.h"
#include "hydra/oracle.h"
#include "hydra/presets.h"
#include "hydra/search.h"

namespace hydra {
namespace {

std::vector<PerfExample> SyntheticDataset(int64_t count, uint64_t seed) {
  const ModelPreset preset = FindModelPreset("mobilellama-1.4b");
  const CoarsePreset config4 = FindCoarsePreset("paper-config4");
  SyntheticOracle oracle(preset.shape, preset.r_standard, {.seed = seed});
  std::vector<PerfExample> data;
  for (auto& s : ProposeCandidates(config4.partition, preset.shape, {128, 2, 10'000},
                                   count, seed)) {
    const MetricVector m = oracle.Evaluate(s);
    data.push_back({std::move(s), m});
  }
  return data;
}

const PerfTrainResult& TrainedOnSynthetic() {
  static const PerfTrainResult result = TrainPerfModel(SyntheticDataset(200, 42), 128);
  return result;
}

TEST(EncodeFeaturesTest, UniformIsAllOnes) {
  const tensor::Matrix f = EncodeFeatures(RankSchedule::Uniform(24, 128), 128);
  ASSERT_EQ(f.rows(), 24);
  ASSERT_EQ(f.cols(), kFeatureDims);
  for (int64_t l = 0; l < 24; ++l) {
    for (int c = 0; c < kNumComponents; ++c) EXPECT_EQ(f(l, c), 1.0);
  }
}

TEST(EncodeFeaturesTest, OneChangeTouchesOneEntry) {
  RankSchedule a = RankSchedule::Uniform(6, 16);
  RankSchedule b = a;
  b.layers[4][ComponentKind::kUp] = 18;
  const tensor::Matrix fa = EncodeFeatures(a, 16);
  const tensor::Matrix fb = EncodeFeatures(b, 16);
  for (int64_t l = 0; l < 6; ++l) {
    for (int64_t c = 0; c < kFeatureDims; ++c) {
      if (l == 4 && c == ComponentIndex(ComponentKind::kUp)) {
        EXPECT_DOUBLE_EQ(fb(l, c), 18.0 / 16.0);
      } else {
        EXPECT_EQ(fa(l, c), fb(l, c));
      }
    }
  }
}

TEST(EncodeFeaturesTest, Config4Setting1Rows) {
  const CoarsePreset p = FindCoarsePreset("paper-config4");
  const tensor::Matrix f =
      EncodeFeatures(RefineFine(p.allocation, p.partition, FineSetting::Preset(1), 2), 128);
  const double layer1[] = {122, 122, 124, 124, 126, 124, 124};
  const double layer10[] = {124, 124, 126, 126, 128, 126, 126};
  for (int c = 0; c < kNumComponents; ++c) {
    EXPECT_DOUBLE_EQ(f(0, c), layer1[c] / 128.0);
    EXPECT_DOUBLE_EQ(f(9, c), layer10[c] / 128.0);
  }
  EXPECT_NEAR(f(0, 0), 0.953, 5e-4);
  EXPECT_NEAR(f(0, 4), 0.984, 5e-4);
}

TEST(EncodeFeaturesTest, InjectiveFiniteAndInRange) {
  const auto data = SyntheticDataset(100, 5);
  std::set<std::vector<double>> seen;
  for (const auto& ex : data) {
    const tensor::Matrix f = EncodeFeatures(ex.schedule, 128);
    EXPECT_TRUE(f.AllFinite());
    for (int64_t l = 0; l < f.rows(); ++l) {
      for (int c = 0; c < kNumComponents; ++c) {
        EXPECT_GT(f(l, c), 0.0);
        EXPECT_LE(f(l, c), 4.0);
      }
    }
    EXPECT_TRUE(seen.insert({f.values().begin(), f.values().end()}).second);
  }
}

TEST(EncodeFeaturesTest, PositionRowsDiffer) {
  const tensor::Matrix f = EncodeFeatures(RankSchedule::Uniform(32, 8), 8);
  std::set<std::vector<double>> rows;
  for (int64_t l = 0; l < 32; ++l) rows.insert({f.row(l), f.row(l) + kFeatureDims});
  EXPECT_EQ(rows.size(), 32u);
}

TEST(DatasetJsonTest, RoundTrip) {
  const auto data = SyntheticDataset(5, 1);
  const auto back = DatasetFromJson(Json::parse(DatasetToJson(data).dump()));
  ASSERT_EQ(back.size(), data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].schedule, data[i].schedule);
    EXPECT_EQ(back[i].metrics, data[i].metrics);
  }
  EXPECT_THROW(DatasetFromJson(Json::parse(R"([{"schedule": {}, "metrics": [1]}])")), Error);
}

TEST(TrainPerfModelTest, TooFewExamples) {
  auto data = SyntheticDataset(9, 2);
  ASSERT_EQ(data.size(), 9u);
  try {
    TrainPerfModel(data, 128);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
}

TEST(TrainPerfModelTest, ConstantTargetsLearnedExactly) {
  auto data = SyntheticDataset(30, 3);
  const MetricVector constant = {1200.0, 48.0, 40.0, 84.0, 55.0, 52.0};
  for (auto& ex : data) ex.metrics = constant;
  const PerfTrainResult r = TrainPerfModel(data, 128);
  EXPECT_LT(r.report.best_val_loss, 1e-3);
  const MetricVector pred = r.model.Predict(data.front().schedule);
  for (int k = 0; k < kNumMetrics; ++k) EXPECT_NEAR(pred[k], constant[k], 1e-2);
}

TEST(TrainPerfModelTest, SplitDisjointExhaustiveAndSeeded) {
  const auto data = SyntheticDataset(40, 4);
  PerfTrainOptions opts;
  opts.max_epochs = 2;
  const auto a = TrainPerfModel(data, 128, opts);
  EXPECT_EQ(a.report.train_indices.size(), 32u);
  EXPECT_EQ(a.report.val_indices.size(), 8u);
  std::vector<size_t> all = a.report.train_indices;
  all.insert(all.end(), a.report.val_indices.begin(), a.report.val_indices.end());
  std::sort(all.begin(), all.end());
  for (size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  const auto b = TrainPerfModel(data, 128, opts);
  EXPECT_EQ(a.report.val_indices, b.report.val_indices);
  opts.seed = 43;
  EXPECT_NE(TrainPerfModel(data, 128, opts).report.val_indices, a.report.val_indices);
}

TEST(TrainPerfModelTest, SameSeedSameLosses) {
  const auto data = SyntheticDataset(30, 6);
  PerfTrainOptions opts;
  opts.max_epochs = 15;
  const auto a = TrainPerfModel(data, 128, opts);
  const auto b = TrainPerfModel(data, 128, opts);
  ASSERT_EQ(a.report.epochs.size(), b.report.epochs.size());
  for (size_t i = 0; i < a.report.epochs.size(); ++i) {
    EXPECT_EQ(a.report.epochs[i].train_loss, b.report.epochs[i].train_loss);
    EXPECT_EQ(a.report.epochs[i].val_loss, b.report.epochs[i].val_loss);
  }
}

TEST(TrainPerfModelTest, BeatsMeanBaselineOnSyntheticOracle) {
  const PerfTrainResult& r = TrainedOnSynthetic();
  EXPECT_LT(r.report.best_val_loss, r.report.mean_baseline_val_loss);
  EXPECT_LE(r.report.epochs.size(), 500u);
  // the model holds the best-validation weights
  std::vector<PerfExample> val;
  const auto data = SyntheticDataset(200, 42);
  for (size_t i : r.report.val_indices) val.push_back(data[i]);
  EXPECT_NEAR(NormalizedMse(r.model, val), r.report.best_val_loss, 1e-9);
}

TEST(TrainPerfModelTest, ReportCsv) {
  const std::string csv = TrainReportCsv(TrainedOnSynthetic().report);
  EXPECT_EQ(csv.rfind("epoch,train_loss,val_loss\n", 0), 0u);
  EXPECT_EQ(static_cast<size_t>(std::count(csv.begin(), csv.end(), '\n')),
            TrainedOnSynthetic().report.epochs.size() + 1);
}

TEST(PredictTest, SwappingLayersChangesPrediction) {
  const PerfModel& model = TrainedOnSynthetic().model;
  RankSchedule s = RankSchedule::Uniform(24, 120);
  s.layers[2] = ComponentRanks::Uniform(100);
  RankSchedule swapped = s;
  std::swap(swapped.layers[2], swapped.layers[20]);
  EXPECT_NE(model.Predict(s), model.Predict(swapped));
}

TEST(PredictTest, ExtremeScheduleFiniteAndLengthChecked) {
  const PerfModel& model = TrainedOnSynthetic().model;
  for (double v : model.Predict(RankSchedule::Uniform(24, 1))) EXPECT_TRUE(std::isfinite(v));
  try {
    model.Predict(RankSchedule::Uniform(23, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(PredictTest, CheckpointRoundTrip) {
  const PerfModel& model = TrainedOnSynthetic().model;
  const auto path = std::filesystem::temp_directory_path() / "hydra_perfmodel_test.json";
  tensor::SaveCheckpoint(model.ToCheckpoint(), path);
  const PerfModel back = PerfModel::FromCheckpoint(tensor::LoadCheckpoint(path));
  const RankSchedule s = SyntheticDataset(3, 8).back().schedule;
  EXPECT_EQ(back.Predict(s), model.Predict(s));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace hydra
