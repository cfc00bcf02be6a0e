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

#ifndef HYDRA_TENSOR_TAPE_H_
#define HYDRA_TENSOR_TAPE_H_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "hydra/tensor/matrix.h"

namespace hydra::tensor {

// A named trainable (or frozen) array with its gradient buffer.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Matrix v, bool train = true)
      : name(std::move(n)),
        value(std::move(v)),
        grad(value.rows(), value.cols()),
        trainable(train) {}

  void ZeroGrad() { grad = Matrix(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  Tape* tape() const { return tape_; }
  int32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Matrix& value() const;
  const Matrix& grad() const;
  bool requires_grad() const;
  int64_t rows() const { return value().rows(); }
  int64_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, int32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int32_t id_ = -1;
};

// Records primitive operations in creation order, which is a topological
// order, and replays them in reverse to accumulate gradients.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape& tape, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Matrix value);
  // Non-owning; `value` must outlive the tape.
  Var ConstantRef(const Matrix& value);
  Var Leaf(Matrix value);
  // Non-owning view of param.value. If param.trainable, Backward adds the
  // node's gradient into param.grad.
  Var Bind(Parameter& param);

  // Appends an op node. Throws Error(kNonFinite) if `value` has a NaN or inf.
  // `backward` is dropped when no input requires a gradient.
  Var Record(Matrix value, std::initializer_list<Var> inputs,
             BackwardFn backward);

  // Reverse sweep from a 1x1 `loss`. May be called once per tape.
  void Backward(Var loss);

  const Matrix& value(Var v) const;
  const Matrix& grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  // Gradient accumulator of `v`, zero-initialized on first use. Ops call this
  // from their backward functions.
  Matrix& GradBuffer(Var v);
  void AccumulateGrad(Var v, const Matrix& g);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix owned;
    const Matrix* ref = nullptr;
    Matrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;

    const Matrix& value() const { return ref != nullptr ? *ref : owned; }
  };

  Var Push(Node node);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace hydra::tensor

#endif  // HYDRA_TENSOR_TAPE_H_
