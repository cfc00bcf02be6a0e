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

#include "hydra/tensor/tape.h"

#include "hydra/error.h"

namespace hydra::tensor {

const Matrix& Var::value() const { return tape_->value(*this); }
const Matrix& Var::grad() const { return tape_->grad(*this); }
bool Var::requires_grad() const { return tape_->requires_grad(*this); }

Var Tape::Push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int32_t>(nodes_.size() - 1));
}

Var Tape::Constant(Matrix value) {
  Node node;
  node.owned = std::move(value);
  return Push(std::move(node));
}

Var Tape::ConstantRef(const Matrix& value) {
  Node node;
  node.ref = &value;
  return Push(std::move(node));
}

Var Tape::Leaf(Matrix value) {
  Node node;
  node.owned = std::move(value);
  node.requires_grad = true;
  return Push(std::move(node));
}

Var Tape::Bind(Parameter& param) {
  Node node;
  node.ref = &param.value;
  node.requires_grad = param.trainable;
  node.param = param.trainable ? &param : nullptr;
  return Push(std::move(node));
}

Var Tape::Record(Matrix value, std::initializer_list<Var> inputs,
                 BackwardFn backward) {
  if (!value.AllFinite()) {
    throw Error(ErrorCode::kNonFinite,
                "non-finite value produced at tape node " +
                    std::to_string(nodes_.size()));
  }
  Node node;
  node.owned = std::move(value);
  for (Var in : inputs) {
    if (in.tape() != this) {
      throw Error(ErrorCode::kInvalidArgument, "op inputs from another tape");
    }
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  return Push(std::move(node));
}

const Matrix& Tape::value(Var v) const { return nodes_[v.id()].value(); }

const Matrix& Tape::grad(Var v) const { return nodes_[v.id()].grad; }

Matrix& Tape::GradBuffer(Var v) {
  Node& node = nodes_[v.id()];
  if (node.grad.empty() && node.value().size() > 0) {
    node.grad = Matrix(node.value().rows(), node.value().cols());
  }
  return node.grad;
}

void Tape::AccumulateGrad(Var v, const Matrix& g) {
  if (!nodes_[v.id()].requires_grad) return;
  GradBuffer(v) += g;
}

void Tape::Backward(Var loss) {
  if (backward_done_) {
    throw Error(ErrorCode::kInvalidArgument, "Backward called twice on a tape");
  }
  backward_done_ = true;
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "loss must be a 1x1 matrix");
  }
  GradBuffer(loss)(0, 0) = 1.0;
  for (int32_t i = loss.id(); i >= 0; --i) {
    Node& node = nodes_[static_cast<size_t>(i)];
    if (!node.backward || node.grad.empty()) continue;
    // No nodes are appended during the sweep, so the reference stays valid.
    node.backward(*this, node.grad);
  }
  for (Node& node : nodes_) {
    if (node.param != nullptr && !node.grad.empty()) {
      node.param->grad += node.grad;
    }
  }
}

}  // namespace hydra::tensor
