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

#ifndef HYDRA_TOY_MODEL_H_
#define HYDRA_TOY_MODEL_H_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hydra/core.h"
#include "hydra/grad_log.h"
#include "hydra/rng.h"
#include "hydra/tensor/matrix.h"
#include "hydra/tensor/tape.h"

namespace hydra {

struct ToyModelConfig {
  int64_t num_layers = 8;
  int64_t hidden_dim = 64;
  int64_t intermediate_dim = 172;
  int64_t heads = 4;
  int64_t vocab = 256;
  int64_t seq_len = 16;
  uint64_t seed = 42;
  double lora_init_std = 0.02;

  ModelShape shape() const {
    return ModelShape(num_layers, hidden_dim, intermediate_dim);
  }
};

// `batch` token sequences of `seq_len` tokens, row-major.
struct TokenBatch {
  int64_t batch = 0;
  int64_t seq_len = 0;
  std::vector<int64_t> tokens;

  // Next-token targets aligned with tokens; the last position of each
  // sequence is -1 (ignored).
  std::vector<int64_t> Targets() const;
};

// Sequences stitched together from a fixed, seeded set of short motifs, so
// next-token prediction has learnable structure.
class SyntheticCorpus {
 public:
  SyntheticCorpus(int64_t vocab, int64_t seq_len, uint64_t seed,
                  int64_t num_motifs = 16);

  TokenBatch Sample(int64_t batch, Rng& rng) const;

 private:
  int64_t vocab_;
  int64_t seq_len_;
  std::vector<std::vector<int64_t>> motifs_;
};

// Decoder-only pre-norm transformer with frozen random base weights and a
// trainable LoRA pair on every adapted projection:
//   y = x W + (x A) B,   A: in x r (Gaussian), B: r x out (zero).
// The adapter scale is fixed at 1.
class ToyLoraTransformer {
 public:
  // Throws kShapeMismatch when the schedule's layer count differs from the
  // config, and kInvalidArgument for a non-positive rank or bad heads.
  ToyLoraTransformer(const ToyModelConfig& config, const RankSchedule& schedule);

  const ToyModelConfig& config() const { return config_; }
  const RankSchedule& schedule() const { return schedule_; }

  // A then B for each (layer, component) in layer-major, component order.
  std::vector<tensor::Parameter*> AdapterParameters();
  std::vector<tensor::Matrix> AdapterValues() const;
  const tensor::Parameter& adapter(int64_t layer, ComponentKind kind,
                                   bool b_matrix) const;
  int64_t TrainableParameterCount() const;

  // Mean next-token cross-entropy. `adapters` are tape variables standing in
  // for AdapterParameters(), in the same order.
  tensor::Var Loss(tensor::Tape& tape, const TokenBatch& batch,
                   std::span<const tensor::Var> adapters) const;
  // Binds the model's own adapter parameters.
  tensor::Var Loss(tensor::Tape& tape, const TokenBatch& batch);

  tensor::Matrix Logits(const TokenBatch& batch) const;
  // Logits of the frozen base network with every adapter removed.
  tensor::Matrix BaseLogits(const TokenBatch& batch) const;

 private:
  struct LayerWeights {
    std::array<tensor::Matrix, kNumComponents> base;
    tensor::Matrix norm1_gain, norm1_bias, norm2_gain, norm2_bias;
  };

  tensor::Var Forward(tensor::Tape& tape, const TokenBatch& batch,
                      std::span<const tensor::Var> adapters) const;

  ToyModelConfig config_;
  RankSchedule schedule_;
  tensor::Matrix embedding_;
  tensor::Matrix positions_;
  std::vector<LayerWeights> layers_;
  tensor::Matrix final_gain_, final_bias_;
  tensor::Matrix output_;
  std::vector<tensor::Parameter> adapters_;
};

struct ToyTrainerConfig {
  ToyModelConfig model;
  // Empty means uniform rank `default_rank` on every component.
  RankSchedule schedule;
  int64_t default_rank = 16;
  int64_t steps = 200;
  int64_t batch = 16;
  double learning_rate = 1e-4;
  double warmup_fraction = 0.03;
  double weight_decay = 0.0;
  int64_t heldout_batch = 16;
};

struct ToyTrainingResult {
  std::vector<GradLogRecord> grad_log;
  std::vector<double> losses;
  double heldout_loss = 0.0;
};

// AdamW with a warmup-then-cosine learning rate. Every step appends two
// records (A and B block) per adapted projection, logged before the update;
// `sink`, when set, sees each record as it is produced. Throws
// Error(kTrainingDiverged) naming the step if the loss or any gradient is
// non-finite.
ToyTrainingResult TrainToyModel(
    const ToyTrainerConfig& config,
    const std::function<void(const GradLogRecord&)>& sink = nullptr);

}  // namespace hydra

#endif  // HYDRA_TOY_MODEL_H_
