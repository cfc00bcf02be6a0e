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

#include "hydra/tensor/grad_check.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "hydra/error.h"
#include "hydra/rng.h"

namespace hydra::tensor {
namespace {

double Evaluate(const ScalarFunction& fn, const std::vector<Matrix>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const Matrix& m : inputs) vars.push_back(tape.Constant(m));
  const Var out = fn(tape, vars);
  return out.value()(0, 0);
}

}  // namespace

GradCheckResult FiniteDiffCheck(const ScalarFunction& fn,
                                const std::vector<Matrix>& inputs,
                                const GradCheckOptions& options) {
  Tape tape;
  std::vector<Var> vars;
  for (const Matrix& m : inputs) vars.push_back(tape.Leaf(m));
  const Var loss = fn(tape, vars);
  tape.Backward(loss);

  std::vector<std::pair<size_t, int64_t>> coords;
  int64_t total = 0;
  for (const Matrix& m : inputs) total += m.size();
  auto locate = [&](int64_t flat) {
    size_t k = 0;
    while (flat >= inputs[k].size()) {
      flat -= inputs[k].size();
      ++k;
    }
    return std::make_pair(k, flat);
  };
  if (total <= options.samples) {
    for (int64_t i = 0; i < total; ++i) coords.push_back(locate(i));
  } else {
    Rng rng(options.seed);
    std::set<int64_t> picked;
    while (static_cast<int64_t>(picked.size()) < options.samples) {
      picked.insert(rng.UniformInt(0, total - 1));
    }
    for (int64_t i : picked) coords.push_back(locate(i));
  }

  GradCheckResult result;
  std::vector<Matrix> probe = inputs;
  for (const auto& [k, i] : coords) {
    const Matrix& g = vars[k].grad();
    const double analytic = g.empty() ? 0.0 : g[i];
    const double original = probe[k][i];
    probe[k][i] = original + options.epsilon;
    const double plus = Evaluate(fn, probe);
    probe[k][i] = original - options.epsilon;
    const double minus = Evaluate(fn, probe);
    probe[k][i] = original;
    const double numeric = (plus - minus) / (2.0 * options.epsilon);
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), options.floor});
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(analytic - numeric) / denom);
    ++result.coordinates_checked;
  }
  return result;
}

}  // namespace hydra::tensor
