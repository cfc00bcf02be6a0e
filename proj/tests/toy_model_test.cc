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

#include "hydra/toy_model.h"

#include <gtest/gtest.h>

#include <cmath>

#include "hydra/error.h"
#include "hydra/tensor/grad_check.h"
#include "hydra/tensor/optim.h"

namespace hydra {
namespace {

using tensor::Matrix;
using tensor::Tape;
using tensor::Var;

ToyModelConfig TinyConfig() {
  ToyModelConfig c;
  c.num_layers = 2;
  c.hidden_dim = 8;
  c.intermediate_dim = 8;
  c.heads = 2;
  c.vocab = 8;
  c.seq_len = 4;
  return c;
}

TEST(ToyModelTest, TrainableCountMatchesParamCount) {
  const ToyModelConfig config;
  for (int64_t r : {1, 4, 16}) {
    ToyLoraTransformer model(config, RankSchedule::Uniform(config.num_layers, r));
    EXPECT_EQ(model.TrainableParameterCount(),
              ParamCount(RankSchedule::Uniform(config.num_layers, r), config.shape()));
  }
  RankSchedule mixed = RankSchedule::Uniform(config.num_layers, 4);
  mixed.layers[3][ComponentKind::kUp] = 9;
  ToyLoraTransformer model(config, mixed);
  EXPECT_EQ(model.TrainableParameterCount(), ParamCount(mixed, config.shape()));
}

TEST(ToyModelTest, ScheduleMismatchRejected) {
  EXPECT_THROW(ToyLoraTransformer(TinyConfig(), RankSchedule::Uniform(3, 2)), Error);
  EXPECT_THROW(ToyLoraTransformer(TinyConfig(), RankSchedule::Uniform(2, 0)), Error);
}

TEST(ToyModelTest, ZeroInitAdapterLeavesBaseOutput) {
  const ToyModelConfig config = TinyConfig();
  ToyLoraTransformer model(config, RankSchedule::Uniform(2, 2));
  const SyntheticCorpus corpus(config.vocab, config.seq_len, 1);
  Rng rng(5);
  const TokenBatch batch = corpus.Sample(3, rng);
  EXPECT_EQ(model.Logits(batch), model.BaseLogits(batch));
  for (const auto& kind : kAllComponents) {
    for (double b : model.adapter(1, kind, true).value.values()) EXPECT_EQ(b, 0.0);
  }
}

TEST(ToyModelTest, FullLossPassesFiniteDifferenceCheck) {
  const ToyModelConfig config = TinyConfig();
  RankSchedule schedule = RankSchedule::Uniform(2, 2);
  schedule.layers[1][ComponentKind::kUp] = 3;
  ToyLoraTransformer model(config, schedule);
  const SyntheticCorpus corpus(config.vocab, config.seq_len, 2);
  Rng rng(3);
  const TokenBatch batch = corpus.Sample(2, rng);
  // B starts at zero; random adapters exercise every path.
  std::vector<Matrix> inputs = model.AdapterValues();
  Rng init(4);
  for (auto& m : inputs) {
    for (double& v : m.values()) v = init.Normal(0.0, 0.3);
  }
  const tensor::GradCheckResult r = tensor::FiniteDiffCheck(
      [&](Tape& tape, std::span<const Var> adapters) {
        return model.Loss(tape, batch, adapters);
      },
      inputs);
  EXPECT_EQ(r.coordinates_checked, 64);
  EXPECT_LT(r.max_relative_error, 1e-4);
}

TEST(ToyModelTest, SgdStepDecreasesBatchLoss) {
  const ToyModelConfig config = TinyConfig();
  ToyLoraTransformer model(config, RankSchedule::Uniform(2, 2));
  const SyntheticCorpus corpus(config.vocab, config.seq_len, 6);
  Rng rng(7);
  const TokenBatch batch = corpus.Sample(4, rng);
  double before = 0.0;
  {
    Tape tape;
    Var loss = model.Loss(tape, batch);
    before = loss.value()(0, 0);
    for (auto* p : model.AdapterParameters()) p->ZeroGrad();
    tape.Backward(loss);
  }
  auto params = model.AdapterParameters();
  tensor::SgdStep(params, 1e-3);
  Tape tape;
  EXPECT_LT(model.Loss(tape, batch).value()(0, 0), before);
}

TEST(ToyModelTest, CorpusTargetsShiftByOne) {
  const SyntheticCorpus corpus(16, 6, 1);
  Rng rng(2);
  const TokenBatch batch = corpus.Sample(2, rng);
  const auto targets = batch.Targets();
  ASSERT_EQ(targets.size(), 12u);
  for (int b = 0; b < 2; ++b) {
    for (int t = 0; t < 5; ++t) EXPECT_EQ(targets[b * 6 + t], batch.tokens[b * 6 + t + 1]);
    EXPECT_EQ(targets[b * 6 + 5], -1);
  }
  for (int64_t tok : batch.tokens) {
    EXPECT_GE(tok, 0);
    EXPECT_LT(tok, 16);
  }
}

TEST(TrainToyModelTest, ReproducibleWithFiniteNonNegativeNorms) {
  ToyTrainerConfig config;
  config.model = TinyConfig();
  config.default_rank = 2;
  config.steps = 6;
  config.batch = 4;
  config.learning_rate = 1e-2;
  int64_t seen = 0;
  const auto a = TrainToyModel(config, [&](const GradLogRecord&) { ++seen; });
  const auto b = TrainToyModel(config);
  EXPECT_EQ(a.losses, b.losses);
  EXPECT_EQ(a.heldout_loss, b.heldout_loss);
  EXPECT_EQ(a.grad_log, b.grad_log);
  EXPECT_EQ(seen, static_cast<int64_t>(a.grad_log.size()));
  EXPECT_EQ(a.grad_log.size(), 6u * 2u * 7u * 2u);
  for (const auto& r : a.grad_log) {
    EXPECT_TRUE(std::isfinite(r.grad_norm));
    EXPECT_GE(r.grad_norm, 0.0);
  }
}

TEST(TrainToyModelTest, LossDecreasesOnDefaultToy) {
  ToyTrainerConfig config;
  config.steps = 40;
  config.learning_rate = 3e-3;
  const auto result = TrainToyModel(config);
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 5; ++i) {
    head += result.losses[i];
    tail += result.losses[result.losses.size() - 1 - i];
  }
  EXPECT_LT(tail, head);
}

TEST(TrainToyModelTest, DivergenceIsReported) {
  ToyTrainerConfig config;
  config.model = TinyConfig();
  config.default_rank = 2;
  config.steps = 50;
  config.batch = 2;
  config.learning_rate = 1e200;
  try {
    TrainToyModel(config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTrainingDiverged);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

}  // namespace
}  // namespace hydra
