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

#include "hydra/tensor/optim.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hydra/error.h"

namespace hydra::tensor {

CosineSchedule::CosineSchedule(double peak, int64_t total_steps,
                               double warmup_fraction)
    : peak_(peak), total_steps_(total_steps) {
  if (total_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "total_steps must be >= 1");
  }
  warmup_steps_ = std::max<int64_t>(
      1, std::llround(warmup_fraction * static_cast<double>(total_steps)));
  warmup_steps_ = std::min(warmup_steps_, total_steps);
}

double CosineSchedule::operator()(int64_t step) const {
  if (step <= 0) return 0.0;
  if (step < warmup_steps_) {
    return peak_ * static_cast<double>(step) /
           static_cast<double>(warmup_steps_);
  }
  if (step >= total_steps_) return 0.0;
  const double progress = static_cast<double>(step - warmup_steps_) /
                          static_cast<double>(total_steps_ - warmup_steps_);
  return peak_ * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamW::AdamW(std::vector<Parameter*> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const Parameter* p : params_) {
    first_moment_.emplace_back(p->value.rows(), p->value.cols());
    second_moment_.emplace_back(p->value.rows(), p->value.cols());
  }
}

void AdamW::Step(double lr) {
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    if (!p.trainable) continue;
    Matrix& m = first_moment_[k];
    Matrix& v = second_moment_[k];
    for (int64_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double update = (m[i] / c1) / (std::sqrt(v[i] / c2) + options_.epsilon);
      p.value[i] -= lr * (update + options_.weight_decay * p.value[i]);
    }
  }
}

void AdamW::ZeroGrad() {
  for (Parameter* p : params_) p->ZeroGrad();
}

void SgdStep(std::span<Parameter* const> params, double lr) {
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    for (int64_t i = 0; i < p->value.size(); ++i) p->value[i] -= lr * p->grad[i];
  }
}

}  // namespace hydra::tensor
