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

#include <cmath>
#include <string>

#include "hydra/error.h"
#include "hydra/tensor/ops.h"
#include "hydra/tensor/optim.h"

namespace hydra {

using tensor::Matrix;
using tensor::Parameter;
using tensor::Tape;
using tensor::Var;

namespace {

Matrix Gaussian(int64_t rows, int64_t cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (int64_t i = 0; i < m.size(); ++i) m[i] = rng.Normal(0.0, stddev);
  return m;
}

Matrix SinusoidalPositions(int64_t seq_len, int64_t dim) {
  Matrix m(seq_len, dim);
  for (int64_t pos = 0; pos < seq_len; ++pos) {
    for (int64_t i = 0; i < dim; ++i) {
      const double freq =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      m(pos, i) = (i % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
    }
  }
  return m;
}

}  // namespace

std::vector<int64_t> TokenBatch::Targets() const {
  std::vector<int64_t> targets(tokens.size(), -1);
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t i = 0; i + 1 < seq_len; ++i) {
      targets[static_cast<size_t>(b * seq_len + i)] =
          tokens[static_cast<size_t>(b * seq_len + i + 1)];
    }
  }
  return targets;
}

SyntheticCorpus::SyntheticCorpus(int64_t vocab, int64_t seq_len, uint64_t seed,
                                 int64_t num_motifs)
    : vocab_(vocab), seq_len_(seq_len) {
  if (vocab < 2 || seq_len < 2 || num_motifs < 1) {
    throw Error(ErrorCode::kInvalidArgument, "corpus needs vocab, seq_len >= 2");
  }
  Rng rng(MixSeed(seed, 0xC0));
  for (int64_t m = 0; m < num_motifs; ++m) {
    std::vector<int64_t> motif(static_cast<size_t>(rng.UniformInt(3, 6)));
    for (int64_t& tok : motif) tok = rng.UniformInt(0, vocab - 1);
    motifs_.push_back(std::move(motif));
  }
}

TokenBatch SyntheticCorpus::Sample(int64_t batch, Rng& rng) const {
  TokenBatch out{batch, seq_len_, {}};
  out.tokens.reserve(static_cast<size_t>(batch * seq_len_));
  for (int64_t b = 0; b < batch; ++b) {
    int64_t filled = 0;
    while (filled < seq_len_) {
      const auto& motif = motifs_[static_cast<size_t>(
          rng.UniformInt(0, static_cast<int64_t>(motifs_.size()) - 1))];
      for (int64_t tok : motif) {
        if (filled == seq_len_) break;
        out.tokens.push_back(tok);
        ++filled;
      }
    }
  }
  return out;
}

ToyLoraTransformer::ToyLoraTransformer(const ToyModelConfig& config,
                                       const RankSchedule& schedule)
    : config_(config), schedule_(schedule) {
  const ModelShape shape = config.shape();
  if (schedule.num_layers() != config.num_layers) {
    throw Error(ErrorCode::kShapeMismatch,
                "schedule has " + std::to_string(schedule.num_layers()) +
                    " layers, toy model has " +
                    std::to_string(config.num_layers));
  }
  if (config.heads < 1 || config.hidden_dim % config.heads != 0 ||
      config.vocab < 2 || config.seq_len < 2) {
    throw Error(ErrorCode::kInvalidArgument, "invalid toy model config");
  }
  Rng rng(config.seed);
  const int64_t d = config.hidden_dim;
  embedding_ = Gaussian(config.vocab, d, 1.0, rng);
  positions_ = SinusoidalPositions(config.seq_len, d);
  const double residual_scale = 1.0 / std::sqrt(2.0 * config.num_layers);
  for (int64_t l = 0; l < config.num_layers; ++l) {
    LayerWeights w;
    for (ComponentKind kind : kAllComponents) {
      const ComponentDims dims = shape.dims(kind);
      double stddev = 1.0 / std::sqrt(static_cast<double>(dims.in_dim));
      if (kind == ComponentKind::kO || kind == ComponentKind::kDown) {
        stddev *= residual_scale;
      }
      w.base[ComponentIndex(kind)] = Gaussian(dims.in_dim, dims.out_dim, stddev, rng);
    }
    w.norm1_gain = Matrix(1, d, 1.0);
    w.norm1_bias = Matrix(1, d, 0.0);
    w.norm2_gain = Matrix(1, d, 1.0);
    w.norm2_bias = Matrix(1, d, 0.0);
    layers_.push_back(std::move(w));
  }
  final_gain_ = Matrix(1, d, 1.0);
  final_bias_ = Matrix(1, d, 0.0);
  output_ = Gaussian(d, config.vocab, 1.0 / std::sqrt(static_cast<double>(d)), rng);

  Rng lora_rng(MixSeed(config.seed, 0x10AA));
  for (int64_t l = 0; l < config.num_layers; ++l) {
    for (ComponentKind kind : kAllComponents) {
      const int64_t r = schedule.layers[static_cast<size_t>(l)][kind];
      if (r < 1) {
        throw Error(ErrorCode::kInvalidArgument,
                    "toy model needs ranks >= 1 (layer " + std::to_string(l + 1) +
                        ", " + std::string(ComponentName(kind)) + ")");
      }
      const ComponentDims dims = shape.dims(kind);
      const std::string prefix = "layers." + std::to_string(l) + "." +
                                 std::string(ComponentName(kind));
      adapters_.emplace_back(prefix + ".A",
                             Gaussian(dims.in_dim, r, config.lora_init_std, lora_rng));
      adapters_.emplace_back(prefix + ".B", Matrix(r, dims.out_dim));
    }
  }
}

std::vector<Parameter*> ToyLoraTransformer::AdapterParameters() {
  std::vector<Parameter*> out;
  for (Parameter& p : adapters_) out.push_back(&p);
  return out;
}

std::vector<Matrix> ToyLoraTransformer::AdapterValues() const {
  std::vector<Matrix> out;
  for (const Parameter& p : adapters_) out.push_back(p.value);
  return out;
}

const Parameter& ToyLoraTransformer::adapter(int64_t layer, ComponentKind kind,
                                             bool b_matrix) const {
  const size_t index =
      static_cast<size_t>((layer * kNumComponents + ComponentIndex(kind)) * 2 +
                          (b_matrix ? 1 : 0));
  return adapters_.at(index);
}

int64_t ToyLoraTransformer::TrainableParameterCount() const {
  int64_t total = 0;
  for (const Parameter& p : adapters_) total += p.value.size();
  return total;
}

Var ToyLoraTransformer::Forward(Tape& tape, const TokenBatch& batch,
                                std::span<const Var> adapters) const {
  const bool with_adapters = !adapters.empty();
  if (with_adapters && adapters.size() != adapters_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "adapter variable count mismatch");
  }
  if (batch.seq_len != config_.seq_len ||
      static_cast<int64_t>(batch.tokens.size()) != batch.batch * batch.seq_len) {
    throw Error(ErrorCode::kShapeMismatch, "token batch does not match model");
  }
  const int64_t rows = batch.batch * batch.seq_len;
  Matrix tiled(rows, config_.hidden_dim);
  for (int64_t i = 0; i < rows; ++i) {
    std::copy_n(positions_.row(i % batch.seq_len), config_.hidden_dim, tiled.row(i));
  }
  Var h = tensor::Add(tensor::Embedding(tape.ConstantRef(embedding_), batch.tokens),
                      tape.Constant(std::move(tiled)));
  const tensor::AttentionShape attention{batch.batch, batch.seq_len,
                                         config_.heads, /*causal=*/true};
  for (int64_t l = 0; l < config_.num_layers; ++l) {
    const LayerWeights& w = layers_[static_cast<size_t>(l)];
    auto project = [&](Var x, ComponentKind kind) {
      Var y = tensor::MatMul(x, tape.ConstantRef(w.base[ComponentIndex(kind)]));
      if (!with_adapters) return y;
      const size_t index =
          static_cast<size_t>((l * kNumComponents + ComponentIndex(kind)) * 2);
      Var low = tensor::MatMul(tensor::MatMul(x, adapters[index]), adapters[index + 1]);
      return tensor::Add(y, low);
    };
    Var a = tensor::LayerNorm(h, tape.ConstantRef(w.norm1_gain),
                              tape.ConstantRef(w.norm1_bias));
    Var att = tensor::Attention(project(a, ComponentKind::kQ),
                                project(a, ComponentKind::kK),
                                project(a, ComponentKind::kV), attention);
    h = tensor::Add(h, project(att, ComponentKind::kO));
    Var c = tensor::LayerNorm(h, tape.ConstantRef(w.norm2_gain),
                              tape.ConstantRef(w.norm2_bias));
    Var gated = tensor::Mul(tensor::Silu(project(c, ComponentKind::kGate)),
                            project(c, ComponentKind::kUp));
    h = tensor::Add(h, project(gated, ComponentKind::kDown));
  }
  Var out = tensor::LayerNorm(h, tape.ConstantRef(final_gain_),
                              tape.ConstantRef(final_bias_));
  return tensor::MatMul(out, tape.ConstantRef(output_));
}

Var ToyLoraTransformer::Loss(Tape& tape, const TokenBatch& batch,
                             std::span<const Var> adapters) const {
  if (adapters.size() != adapters_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "adapter variable count mismatch");
  }
  const std::vector<int64_t> targets = batch.Targets();
  return tensor::CrossEntropy(Forward(tape, batch, adapters), targets);
}

Var ToyLoraTransformer::Loss(Tape& tape, const TokenBatch& batch) {
  std::vector<Var> vars;
  vars.reserve(adapters_.size());
  for (Parameter& p : adapters_) vars.push_back(tape.Bind(p));
  return Loss(tape, batch, vars);
}

Matrix ToyLoraTransformer::Logits(const TokenBatch& batch) const {
  Tape tape;
  std::vector<Var> vars;
  for (const Parameter& p : adapters_) vars.push_back(tape.ConstantRef(p.value));
  return Forward(tape, batch, vars).value();
}

Matrix ToyLoraTransformer::BaseLogits(const TokenBatch& batch) const {
  Tape tape;
  return Forward(tape, batch, {}).value();
}

ToyTrainingResult TrainToyModel(
    const ToyTrainerConfig& config,
    const std::function<void(const GradLogRecord&)>& sink) {
  if (config.steps < 1 || config.batch < 1) {
    throw Error(ErrorCode::kInvalidArgument, "steps and batch must be >= 1");
  }
  const RankSchedule schedule =
      config.schedule.layers.empty()
          ? RankSchedule::Uniform(config.model.num_layers, config.default_rank)
          : config.schedule;
  ToyLoraTransformer model(config.model, schedule);
  const SyntheticCorpus corpus(config.model.vocab, config.model.seq_len,
                               config.model.seed);
  Rng data_rng(MixSeed(config.model.seed, 0xDA7A));
  std::vector<Parameter*> params = model.AdapterParameters();
  tensor::AdamW optimizer(params, {.learning_rate = config.learning_rate,
                                   .weight_decay = config.weight_decay});
  const tensor::CosineSchedule lr(config.learning_rate, config.steps,
                                  config.warmup_fraction);

  ToyTrainingResult result;
  for (int64_t step = 0; step < config.steps; ++step) {
    const TokenBatch batch = corpus.Sample(config.batch, data_rng);
    optimizer.ZeroGrad();
    double loss_value = 0.0;
    try {
      Tape tape;
      const Var loss = model.Loss(tape, batch);
      loss_value = loss.value()(0, 0);
      tape.Backward(loss);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFinite) throw;
      throw Error(ErrorCode::kTrainingDiverged,
                  "training diverged at step " + std::to_string(step) + ": " +
                      e.what());
    }
    for (int64_t l = 0; l < config.model.num_layers; ++l) {
      for (ComponentKind kind : kAllComponents) {
        for (bool b_matrix : {false, true}) {
          const Parameter& p = model.adapter(l, kind, b_matrix);
          const GradLogRecord record{step, l + 1, kind, p.grad.Norm()};
          if (!std::isfinite(record.grad_norm)) {
            throw Error(ErrorCode::kTrainingDiverged,
                        "non-finite gradient at step " + std::to_string(step));
          }
          if (sink) sink(record);
          result.grad_log.push_back(record);
        }
      }
    }
    result.losses.push_back(loss_value);
    optimizer.Step(lr(step));
  }
  Rng heldout_rng(MixSeed(config.model.seed, 0x4E1D));
  const TokenBatch heldout = corpus.Sample(config.heldout_batch, heldout_rng);
  Tape tape;
  result.heldout_loss = model.Loss(tape, heldout).value()(0, 0);
  return result;
}

}  // namespace hydra
