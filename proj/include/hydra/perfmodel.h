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

#ifndef HYDRA_PERFMODEL_H_
#define HYDRA_PERFMODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hydra/core.h"
#include "hydra/metrics.h"
#include "hydra/schedule_io.h"
#include "hydra/tensor/checkpoint.h"
#include "hydra/tensor/matrix.h"
#include "hydra/tensor/tape.h"

namespace hydra {

inline constexpr int64_t kPositionDims = 8;
inline constexpr int64_t kFeatureDims = kNumComponents + kPositionDims;

// One row per layer: the seven ranks divided by r_standard, then a
// sinusoidal encoding of the layer index.
tensor::Matrix EncodeFeatures(const RankSchedule& schedule, int64_t r_standard);

struct PerfExample {
  RankSchedule schedule;
  MetricVector metrics{};
};

// JSON array of {"schedule": <schedule JSON>, "metrics": [6 reals]}.
Json DatasetToJson(std::span<const PerfExample> examples);
std::vector<PerfExample> DatasetFromJson(const Json& json);

struct PerfModelConfig {
  int64_t model_dim = 32;
  int64_t heads = 4;
  int64_t ffn_dim = 64;
};

struct PerfTrainOptions {
  uint64_t seed = 42;
  double train_fraction = 0.8;
  int64_t max_epochs = 500;
  int64_t patience = 20;
  int64_t batch_size = 16;
  double learning_rate = 1e-3;
};

struct EpochLoss {
  int64_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

// Losses are mean squared errors on z-scored targets.
struct PerfTrainReport {
  std::vector<EpochLoss> epochs;
  std::vector<size_t> train_indices;
  std::vector<size_t> val_indices;
  int64_t best_epoch = 0;
  double best_val_loss = 0.0;
  // Validation MSE of always predicting the training-set mean.
  double mean_baseline_val_loss = 0.0;
};

// "epoch,train_loss,val_loss" header plus one row per epoch.
std::string TrainReportCsv(const PerfTrainReport& report);

// Input projection, one post-norm encoder layer (multi-head self-attention
// and a GeLU feed-forward block), mean pooling over layers, linear head.
class PerfModel {
 public:
  PerfModel(int64_t num_layers, int64_t r_standard, PerfModelConfig config,
            uint64_t seed);

  int64_t num_layers() const { return num_layers_; }
  int64_t r_standard() const { return r_standard_; }
  const PerfModelConfig& config() const { return config_; }

  // Throws kShapeMismatch when the schedule has a different layer count.
  MetricVector Predict(const RankSchedule& schedule) const;

  // Normalized-space outputs for a stack of feature matrices, batch x 6.
  tensor::Var Forward(tensor::Tape& tape,
                      std::span<const tensor::Matrix* const> features);

  std::vector<tensor::Parameter*> Parameters();
  void SetTargetScaling(const MetricVector& mean, const MetricVector& stddev);
  const MetricVector& target_mean() const { return target_mean_; }
  const MetricVector& target_std() const { return target_std_; }

  tensor::Checkpoint ToCheckpoint() const;
  // Throws kParse on a missing array or inconsistent metadata.
  static PerfModel FromCheckpoint(const tensor::Checkpoint& checkpoint);

 private:
  tensor::Parameter& param(const std::string& name);
  std::vector<tensor::Parameter> params_;
  int64_t num_layers_;
  int64_t r_standard_;
  PerfModelConfig config_;
  MetricVector target_mean_{};
  MetricVector target_std_{};
};

struct PerfTrainResult {
  PerfModel model;
  PerfTrainReport report;
};

// Seeded split, Adam on MSE over z-scored targets, early stopping on the
// validation loss; the returned model holds the best-validation weights.
// Throws kInsufficientData below 10 examples, kShapeMismatch when layer
// counts differ, kTrainingDiverged on a non-finite loss.
PerfTrainResult TrainPerfModel(std::span<const PerfExample> examples,
                               int64_t r_standard,
                               const PerfTrainOptions& options = {},
                               const PerfModelConfig& config = {});

// MSE of `model` on `examples` in the model's normalized target space.
double NormalizedMse(const PerfModel& model,
                     std::span<const PerfExample> examples);

}  // namespace hydra

#endif  // HYDRA_PERFMODEL_H_
