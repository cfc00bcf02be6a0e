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

#ifndef HYDRA_TENSOR_OPTIM_H_
#define HYDRA_TENSOR_OPTIM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "hydra/tensor/tape.h"

namespace hydra::tensor {

// Linear warmup from 0 to `peak` over the first warmup steps, then cosine
// decay to 0 at `total_steps`. The warmup length is
// max(1, round(warmup_fraction * total_steps)).
class CosineSchedule {
 public:
  CosineSchedule(double peak, int64_t total_steps, double warmup_fraction = 0.03);

  double operator()(int64_t step) const;
  int64_t warmup_steps() const { return warmup_steps_; }
  int64_t total_steps() const { return total_steps_; }

 private:
  double peak_;
  int64_t total_steps_;
  int64_t warmup_steps_;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Decoupled (AdamW) decay; 0 gives plain Adam.
  double weight_decay = 0.0;
};

// Adam/AdamW over a fixed list of parameters. Frozen parameters are skipped.
class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, AdamOptions options);

  // One update with the parameters' current gradients at learning rate `lr`.
  void Step(double lr);
  void Step() { Step(options_.learning_rate); }
  void ZeroGrad();

  int64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }

 private:
  std::vector<Parameter*> params_;
  AdamOptions options_;
  std::vector<Matrix> first_moment_;
  std::vector<Matrix> second_moment_;
  int64_t step_ = 0;
};

// Plain gradient descent: value -= lr * grad for trainable parameters.
void SgdStep(std::span<Parameter* const> params, double lr);

}  // namespace hydra::tensor

#endif  // HYDRA_TENSOR_OPTIM_H_
