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

#ifndef HYDRA_TENSOR_OPS_H_
#define HYDRA_TENSOR_OPS_H_

#include <cstdint>
#include <span>

#include "hydra/tensor/tape.h"

namespace hydra::tensor {

// Differentiable primitives. Inputs must live on the same tape; shape errors
// throw Error(kShapeMismatch) and non-finite outputs Error(kNonFinite).

Var MatMul(Var a, Var b);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
// Elementwise product.
Var Mul(Var a, Var b);
Var Scale(Var a, double factor);
// Adds a 1 x cols row to every row of x.
Var AddRowBroadcast(Var x, Var row);
Var RowSoftmax(Var a);
// Row-wise normalization with 1 x cols gain and bias.
Var LayerNorm(Var x, Var gain, Var bias, double eps = 1e-5);
// Exact (erf-based) GeLU.
Var Gelu(Var a);
Var Silu(Var a);
// Gathers rows of `table`.
Var Embedding(Var table, std::span<const int64_t> ids);
// Sum of all entries, 1x1.
Var Sum(Var a);

// Mean token cross-entropy over rows whose target is >= 0; rows with a
// negative target are ignored. Result is 1x1.
Var CrossEntropy(Var logits, std::span<const int64_t> targets);
// Mean over all entries of (pred - target)^2. Result is 1x1.
Var MeanSquaredError(Var pred, const Matrix& target);

// Rows of q/k/v are `batch` sequences of `seq_len` tokens stacked; columns
// are `heads` equal slices. Softmax(q k^T / sqrt(head_dim)) v per sequence and
// head, optionally with a causal mask.
struct AttentionShape {
  int64_t batch = 1;
  int64_t seq_len = 1;
  int64_t heads = 1;
  bool causal = false;
};
Var Attention(Var q, Var k, Var v, const AttentionShape& shape);

// Mean of each consecutive block of `seq_len` rows: (batch*seq_len) x c ->
// batch x c.
Var SegmentMean(Var x, int64_t seq_len);

}  // namespace hydra::tensor

#endif  // HYDRA_TENSOR_OPS_H_
