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

#ifndef HYDRA_TENSOR_GRAD_CHECK_H_
#define HYDRA_TENSOR_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hydra/tensor/tape.h"

namespace hydra::tensor {

// Builds a scalar (1x1) loss on `tape` from leaf variables, one per input.
using ScalarFunction = std::function<Var(Tape& tape, std::span<const Var> inputs)>;

struct GradCheckOptions {
  double epsilon = 1e-5;
  int64_t samples = 64;
  uint64_t seed = 42;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double floor = 1e-6;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  int64_t coordinates_checked = 0;
};

// Central differences against reverse mode at `samples` distinct seeded
// coordinates (all coordinates when there are fewer).
GradCheckResult FiniteDiffCheck(const ScalarFunction& fn,
                                const std::vector<Matrix>& inputs,
                                const GradCheckOptions& options = {});

}  // namespace hydra::tensor

#endif  // HYDRA_TENSOR_GRAD_CHECK_H_
