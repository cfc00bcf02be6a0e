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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "hydra/error.h"
#include "hydra/rng.h"
#include "hydra/tensor/ops.h"
#include "hydra/tensor/optim.h"

namespace hydra {

using tensor::Matrix;
using tensor::Parameter;
using tensor::Tape;
using tensor::Var;

namespace {

// Order is the checkpoint order and the order Forward consumes variables in.
enum ParamSlot {
  kInW, kInB,
  kWq, kBq, kWk, kBk, kWv, kBv, kWo, kBo,
  kNorm1Gain, kNorm1Bias,
  kFfnW1, kFfnB1, kFfnW2, kFfnB2,
  kNorm2Gain, kNorm2Bias,
  kHeadW, kHeadB,
  kNumSlots
};

constexpr const char* kSlotNames[kNumSlots] = {
    "input.weight",  "input.bias",   "attn.q.weight", "attn.q.bias",
    "attn.k.weight", "attn.k.bias",  "attn.v.weight", "attn.v.bias",
    "attn.o.weight", "attn.o.bias",  "norm1.gain",    "norm1.bias",
    "ffn.w1",        "ffn.b1",       "ffn.w2",        "ffn.b2",
    "norm2.gain",    "norm2.bias",   "head.weight",   "head.bias"};

Matrix Gaussian(int64_t rows, int64_t cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.Normal(0.0, stddev);
  return m;
}

Matrix StackFeatures(std::span<const Matrix* const> features) {
  const int64_t n = features.front()->rows();
  Matrix out(static_cast<int64_t>(features.size()) * n, kFeatureDims);
  for (size_t b = 0; b < features.size(); ++b) {
    if (features[b]->rows() != n) {
      throw Error(ErrorCode::kShapeMismatch, "feature batches differ in layer count");
    }
    std::copy_n(features[b]->data(), n * kFeatureDims,
                out.row(static_cast<int64_t>(b) * n));
  }
  return out;
}

Var EncoderForward(Tape& tape, std::span<const Var> p, const Matrix& x_in,
                   int64_t batch, int64_t seq_len, int64_t heads) {
  using namespace tensor;  // NOLINT
  Var x = AddRowBroadcast(MatMul(tape.Constant(x_in), p[kInW]), p[kInB]);
  Var q = AddRowBroadcast(MatMul(x, p[kWq]), p[kBq]);
  Var k = AddRowBroadcast(MatMul(x, p[kWk]), p[kBk]);
  Var v = AddRowBroadcast(MatMul(x, p[kWv]), p[kBv]);
  Var a = Attention(q, k, v, {batch, seq_len, heads, false});
  Var o = AddRowBroadcast(MatMul(a, p[kWo]), p[kBo]);
  x = LayerNorm(Add(x, o), p[kNorm1Gain], p[kNorm1Bias]);
  Var h = Gelu(AddRowBroadcast(MatMul(x, p[kFfnW1]), p[kFfnB1]));
  Var f = AddRowBroadcast(MatMul(h, p[kFfnW2]), p[kFfnB2]);
  x = LayerNorm(Add(x, f), p[kNorm2Gain], p[kNorm2Bias]);
  Var pooled = SegmentMean(x, seq_len);
  return AddRowBroadcast(MatMul(pooled, p[kHeadW]), p[kHeadB]);
}

MetricVector ZScore(const MetricVector& m, const MetricVector& mean,
                    const MetricVector& stddev) {
  MetricVector z{};
  for (int k = 0; k < kNumMetrics; ++k) z[k] = (m[k] - mean[k]) / stddev[k];
  return z;
}

}  // namespace

Matrix EncodeFeatures(const RankSchedule& schedule, int64_t r_standard) {
  if (r_standard < 1) {
    throw Error(ErrorCode::kInvalidArgument, "r_standard must be positive");
  }
  Matrix f(schedule.num_layers(), kFeatureDims);
  for (int64_t l = 0; l < schedule.num_layers(); ++l) {
    const auto& ranks = schedule.layers[static_cast<size_t>(l)].values();
    for (int c = 0; c < kNumComponents; ++c) {
      f(l, c) = static_cast<double>(ranks[static_cast<size_t>(c)]) /
                static_cast<double>(r_standard);
    }
    for (int64_t j = 0; j < kPositionDims / 2; ++j) {
      const double angle =
          static_cast<double>(l) / std::pow(10000.0, 2.0 * j / kPositionDims);
      f(l, kNumComponents + 2 * j) = std::sin(angle);
      f(l, kNumComponents + 2 * j + 1) = std::cos(angle);
    }
  }
  return f;
}

Json DatasetToJson(std::span<const PerfExample> examples) {
  Json out = Json::array();
  for (const auto& ex : examples) {
    Json metrics = Json::array();
    for (double m : ex.metrics) metrics.push_back(m);
    out.push_back(Json{{"schedule", ScheduleToJson(ex.schedule)},
                       {"metrics", metrics}});
  }
  return out;
}

std::vector<PerfExample> DatasetFromJson(const Json& json) {
  if (!json.is_array()) {
    throw Error(ErrorCode::kParse, "dataset must be a JSON array");
  }
  std::vector<PerfExample> out;
  for (size_t i = 0; i < json.size(); ++i) {
    const Json& item = json[i];
    const std::string where = "dataset entry " + std::to_string(i);
    if (!item.is_object() || !item.contains("schedule") || !item.contains("metrics")) {
      throw Error(ErrorCode::kParse, where + ": expected schedule and metrics");
    }
    const Json& metrics = item["metrics"];
    if (!metrics.is_array() || metrics.size() != kNumMetrics) {
      throw Error(ErrorCode::kParse, where + ": metrics must hold 6 numbers");
    }
    PerfExample ex;
    ex.schedule = ScheduleFromJson(item["schedule"]);
    for (int k = 0; k < kNumMetrics; ++k) {
      const Json& v = metrics[static_cast<size_t>(k)];
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw Error(ErrorCode::kParse, where + ": non-finite metric");
      }
      ex.metrics[k] = v.get<double>();
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::string TrainReportCsv(const PerfTrainReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,val_loss\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
  }
  return out.str();
}

PerfModel::PerfModel(int64_t num_layers, int64_t r_standard,
                     PerfModelConfig config, uint64_t seed)
    : num_layers_(num_layers), r_standard_(r_standard), config_(config) {
  if (num_layers < 1 || r_standard < 1 || config.model_dim < 1 ||
      config.heads < 1 || config.model_dim % config.heads != 0 ||
      config.ffn_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bad performance model configuration");
  }
  target_std_.fill(1.0);
  Rng rng(MixSeed(seed, 0x9e1f));
  const int64_t d = config.model_dim;
  const int64_t h = config.ffn_dim;
  auto add = [&](ParamSlot slot, Matrix value) {
    params_.emplace_back(kSlotNames[slot], std::move(value));
  };
  const double in_std = 1.0 / std::sqrt(static_cast<double>(kFeatureDims));
  const double d_std = 1.0 / std::sqrt(static_cast<double>(d));
  add(kInW, Gaussian(kFeatureDims, d, in_std, rng));
  add(kInB, Matrix(1, d));
  for (ParamSlot w : {kWq, kWk, kWv, kWo}) {
    add(w, Gaussian(d, d, d_std, rng));
    add(static_cast<ParamSlot>(w + 1), Matrix(1, d));
  }
  add(kNorm1Gain, Matrix(1, d, 1.0));
  add(kNorm1Bias, Matrix(1, d));
  add(kFfnW1, Gaussian(d, h, d_std, rng));
  add(kFfnB1, Matrix(1, h));
  add(kFfnW2, Gaussian(h, d, 1.0 / std::sqrt(static_cast<double>(h)), rng));
  add(kFfnB2, Matrix(1, d));
  add(kNorm2Gain, Matrix(1, d, 1.0));
  add(kNorm2Bias, Matrix(1, d));
  add(kHeadW, Gaussian(d, kNumMetrics, d_std, rng));
  add(kHeadB, Matrix(1, kNumMetrics));
}

Parameter& PerfModel::param(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::kParse, "no parameter " + name);
}

std::vector<Parameter*> PerfModel::Parameters() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

void PerfModel::SetTargetScaling(const MetricVector& mean,
                                 const MetricVector& stddev) {
  target_mean_ = mean;
  target_std_ = stddev;
}

Var PerfModel::Forward(Tape& tape, std::span<const Matrix* const> features) {
  if (features.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no schedules to evaluate");
  }
  std::vector<Var> vars;
  for (auto& p : params_) vars.push_back(tape.Bind(p));
  return EncoderForward(tape, vars, StackFeatures(features),
                        static_cast<int64_t>(features.size()), num_layers_,
                        config_.heads);
}

MetricVector PerfModel::Predict(const RankSchedule& schedule) const {
  if (schedule.num_layers() != num_layers_) {
    throw Error(ErrorCode::kShapeMismatch,
                "schedule has " + std::to_string(schedule.num_layers()) +
                    " layers, model expects " + std::to_string(num_layers_));
  }
  const Matrix features = EncodeFeatures(schedule, r_standard_);
  Tape tape;
  std::vector<Var> vars;
  for (const auto& p : params_) vars.push_back(tape.ConstantRef(p.value));
  const Matrix& z =
      EncoderForward(tape, vars, features, 1, num_layers_, config_.heads).value();
  MetricVector out{};
  for (int k = 0; k < kNumMetrics; ++k) {
    out[k] = z(0, k) * target_std_[k] + target_mean_[k];
  }
  return out;
}

tensor::Checkpoint PerfModel::ToCheckpoint() const {
  tensor::Checkpoint ckpt;
  ckpt.metadata = Json{{"kind", "perfmodel"},
                       {"num_layers", num_layers_},
                       {"r_standard", r_standard_},
                       {"model_dim", config_.model_dim},
                       {"heads", config_.heads},
                       {"ffn_dim", config_.ffn_dim},
                       {"target_mean", target_mean_},
                       {"target_std", target_std_}};
  for (const auto& p : params_) ckpt.arrays[p.name] = p.value;
  return ckpt;
}

PerfModel PerfModel::FromCheckpoint(const tensor::Checkpoint& checkpoint) {
  const Json& meta = checkpoint.metadata;
  try {
    if (meta.at("kind").get<std::string>() != "perfmodel") {
      throw Error(ErrorCode::kParse, "checkpoint is not a performance model");
    }
    PerfModelConfig config{meta.at("model_dim").get<int64_t>(),
                           meta.at("heads").get<int64_t>(),
                           meta.at("ffn_dim").get<int64_t>()};
    PerfModel model(meta.at("num_layers").get<int64_t>(),
                    meta.at("r_standard").get<int64_t>(), config, 0);
    for (auto& p : model.params_) {
      const Matrix& value = checkpoint.at(p.name);
      if (!value.SameShape(p.value)) {
        throw Error(ErrorCode::kParse, "array " + p.name + " has the wrong shape");
      }
      p.value = value;
    }
    model.target_mean_ = meta.at("target_mean").get<MetricVector>();
    model.target_std_ = meta.at("target_std").get<MetricVector>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("perfmodel metadata: ") + e.what());
  }
}

double NormalizedMse(const PerfModel& model,
                     std::span<const PerfExample> examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) {
    const MetricVector pred = model.Predict(ex.schedule);
    for (int k = 0; k < kNumMetrics; ++k) {
      const double e = (pred[k] - ex.metrics[k]) / model.target_std()[k];
      total += e * e;
    }
  }
  return total / static_cast<double>(examples.size() * kNumMetrics);
}

PerfTrainResult TrainPerfModel(std::span<const PerfExample> examples,
                               int64_t r_standard,
                               const PerfTrainOptions& options,
                               const PerfModelConfig& config) {
  if (examples.size() < 10) {
    throw Error(ErrorCode::kInsufficientData,
                "need at least 10 examples, got " + std::to_string(examples.size()));
  }
  const int64_t num_layers = examples.front().schedule.num_layers();
  for (const auto& ex : examples) {
    if (ex.schedule.num_layers() != num_layers) {
      throw Error(ErrorCode::kShapeMismatch, "examples differ in layer count");
    }
  }

  PerfTrainReport report;
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(MixSeed(options.seed, 0x5b11));
  split_rng.Shuffle(order);
  const auto n_train = std::clamp<size_t>(
      static_cast<size_t>(std::llround(options.train_fraction *
                                       static_cast<double>(examples.size()))),
      1, examples.size() - 1);
  report.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  report.val_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  MetricVector mean{};
  MetricVector stddev{};
  for (size_t i : report.train_indices) {
    for (int k = 0; k < kNumMetrics; ++k) mean[k] += examples[i].metrics[k];
  }
  for (double& m : mean) m /= static_cast<double>(n_train);
  for (size_t i : report.train_indices) {
    for (int k = 0; k < kNumMetrics; ++k) {
      const double e = examples[i].metrics[k] - mean[k];
      stddev[k] += e * e;
    }
  }
  for (double& s : stddev) {
    s = std::sqrt(s / static_cast<double>(n_train));
    if (!(s > 1e-12)) s = 1.0;
  }

  std::vector<Matrix> features;
  std::vector<MetricVector> targets;
  for (const auto& ex : examples) {
    features.push_back(EncodeFeatures(ex.schedule, r_standard));
    targets.push_back(ZScore(ex.metrics, mean, stddev));
  }

  PerfModel model(num_layers, r_standard, config, options.seed);
  model.SetTargetScaling(mean, stddev);

  auto batch_inputs = [&](std::span<const size_t> idx) {
    std::vector<const Matrix*> f;
    Matrix t(static_cast<int64_t>(idx.size()), kNumMetrics);
    for (size_t b = 0; b < idx.size(); ++b) {
      f.push_back(&features[idx[b]]);
      for (int k = 0; k < kNumMetrics; ++k) {
        t(static_cast<int64_t>(b), k) = targets[idx[b]][k];
      }
    }
    return std::make_pair(std::move(f), std::move(t));
  };
  // Evaluation on a frozen snapshot: parameters enter as constants, so no
  // gradient can reach them.
  auto evaluate = [&](std::span<const size_t> idx) {
    auto [f, t] = batch_inputs(idx);
    Tape tape;
    std::vector<Var> vars;
    for (Parameter* p : model.Parameters()) vars.push_back(tape.ConstantRef(p->value));
    Var out = EncoderForward(tape, vars, StackFeatures(f),
                             static_cast<int64_t>(f.size()), num_layers,
                             config.heads);
    return tensor::MeanSquaredError(out, t).value()(0, 0);
  };

  {
    double baseline = 0.0;
    for (size_t i : report.val_indices) {
      for (double z : targets[i]) baseline += z * z;
    }
    report.mean_baseline_val_loss =
        baseline / static_cast<double>(report.val_indices.size() * kNumMetrics);
  }

  tensor::AdamW adam(model.Parameters(), {.learning_rate = options.learning_rate});
  Rng batch_rng(MixSeed(options.seed, 0xba7c));
  std::vector<Matrix> best = [&] {
    std::vector<Matrix> v;
    for (Parameter* p : model.Parameters()) v.push_back(p->value);
    return v;
  }();
  report.best_val_loss = std::numeric_limits<double>::infinity();
  int64_t since_best = 0;
  std::vector<size_t> train = report.train_indices;
  const auto batch_size = static_cast<size_t>(std::max<int64_t>(1, options.batch_size));

  for (int64_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    batch_rng.Shuffle(train);
    for (size_t start = 0; start < train.size(); start += batch_size) {
      const size_t end = std::min(train.size(), start + batch_size);
      auto [f, t] = batch_inputs(std::span<const size_t>(train).subspan(start, end - start));
      adam.ZeroGrad();
      try {
        Tape tape;
        Var loss = tensor::MeanSquaredError(model.Forward(tape, f), t);
        tape.Backward(loss);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFinite) throw;
        throw Error(ErrorCode::kTrainingDiverged,
                    "performance model diverged in epoch " + std::to_string(epoch));
      }
      adam.Step();
    }
    EpochLoss row{epoch, 0.0, 0.0};
    try {
      row.train_loss = evaluate(report.train_indices);
      row.val_loss = evaluate(report.val_indices);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFinite) throw;
      throw Error(ErrorCode::kTrainingDiverged,
                  "performance model diverged in epoch " + std::to_string(epoch));
    }
    report.epochs.push_back(row);
    if (row.val_loss < report.best_val_loss) {
      report.best_val_loss = row.val_loss;
      report.best_epoch = epoch;
      since_best = 0;
      auto params = model.Parameters();
      for (size_t i = 0; i < params.size(); ++i) best[i] = params[i]->value;
    } else if (++since_best >= options.patience) {
      break;
    }
  }
  auto params = model.Parameters();
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
  return {std::move(model), std::move(report)};
}

}  // namespace hydra
