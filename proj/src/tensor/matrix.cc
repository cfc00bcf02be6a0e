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

#include "hydra/tensor/matrix.h"

#include <Eigen/Core>
#include <cmath>

#include "hydra/error.h"

namespace hydra::tensor {
namespace {

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> View(const Matrix& m) {
  return Eigen::Map<const RowMajor>(m.data(), m.rows(), m.cols());
}

Eigen::Map<RowMajor> View(Matrix& m) {
  return Eigen::Map<RowMajor>(m.data(), m.rows(), m.cols());
}

void CheckProduct(const Matrix& a, const Matrix& b, bool ta, bool tb,
                  int64_t& rows, int64_t& cols) {
  const int64_t a_inner = ta ? a.rows() : a.cols();
  const int64_t b_inner = tb ? b.cols() : b.rows();
  if (a_inner != b_inner) {
    throw Error(ErrorCode::kShapeMismatch,
                "matmul inner dimensions differ: " + std::to_string(a_inner) +
                    " vs " + std::to_string(b_inner));
  }
  rows = ta ? a.cols() : a.rows();
  cols = tb ? b.rows() : b.cols();
}

}  // namespace

Matrix::Matrix(int64_t rows, int64_t cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols), fill) {
  if (rows < 0 || cols < 0) {
    throw Error(ErrorCode::kShapeMismatch, "negative matrix dimension");
  }
}

Matrix Matrix::Identity(int64_t n) {
  Matrix m(n, n);
  for (int64_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::FromRows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const int64_t r = static_cast<int64_t>(rows.size());
  const int64_t c = r == 0 ? 0 : static_cast<int64_t>(rows.begin()->size());
  Matrix m(r, c);
  int64_t i = 0;
  for (const auto& row : rows) {
    if (static_cast<int64_t>(row.size()) != c) {
      throw Error(ErrorCode::kShapeMismatch, "ragged matrix literal");
    }
    int64_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

bool Matrix::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Matrix::SquaredNorm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

double Matrix::Norm() const { return std::sqrt(SquaredNorm()); }

void Matrix::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Matrix& Matrix::operator+=(const Matrix& other) {
  if (!SameShape(other)) {
    throw Error(ErrorCode::kShapeMismatch, "matrix += shape mismatch");
  }
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double scale) {
  for (double& v : data_) v *= scale;
  return *this;
}

Matrix MatMul(const Matrix& a, const Matrix& b, bool transpose_a,
              bool transpose_b) {
  int64_t rows = 0, cols = 0;
  CheckProduct(a, b, transpose_a, transpose_b, rows, cols);
  Matrix out(rows, cols);
  MatMulAccumulate(a, b, out, transpose_a, transpose_b);
  return out;
}

void MatMulAccumulate(const Matrix& a, const Matrix& b, Matrix& out,
                      bool transpose_a, bool transpose_b) {
  int64_t rows = 0, cols = 0;
  CheckProduct(a, b, transpose_a, transpose_b, rows, cols);
  if (out.rows() != rows || out.cols() != cols) {
    throw Error(ErrorCode::kShapeMismatch, "matmul output shape mismatch");
  }
  auto o = View(out);
  const auto va = View(a);
  const auto vb = View(b);
  if (!transpose_a && !transpose_b) {
    o.noalias() += va * vb;
  } else if (transpose_a && !transpose_b) {
    o.noalias() += va.transpose() * vb;
  } else if (!transpose_a && transpose_b) {
    o.noalias() += va * vb.transpose();
  } else {
    o.noalias() += va.transpose() * vb.transpose();
  }
}

Matrix Transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int64_t i = 0; i < a.rows(); ++i) {
    for (int64_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

}  // namespace hydra::tensor
