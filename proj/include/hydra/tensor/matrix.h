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

#ifndef HYDRA_TENSOR_MATRIX_H_
#define HYDRA_TENSOR_MATRIX_H_

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace hydra::tensor {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int64_t rows, int64_t cols, double fill = 0.0);

  static Matrix Identity(int64_t n);
  static Matrix FromRows(std::initializer_list<std::initializer_list<double>> rows);

  int64_t rows() const { return rows_; }
  int64_t cols() const { return cols_; }
  int64_t size() const { return rows_ * cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * cols_ + c)]; }
  double operator()(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * cols_ + c)]; }
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* row(int64_t r) { return data_.data() + r * cols_; }
  const double* row(int64_t r) const { return data_.data() + r * cols_; }

  bool SameShape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool AllFinite() const;
  double SquaredNorm() const;
  double Norm() const;
  void Fill(double value);

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double scale);

  bool operator==(const Matrix&) const = default;

 private:
  int64_t rows_ = 0;
  int64_t cols_ = 0;
  std::vector<double> data_;
};

// out = op(a) * op(b), where op transposes when the flag is set.
Matrix MatMul(const Matrix& a, const Matrix& b, bool transpose_a = false,
              bool transpose_b = false);

// out += op(a) * op(b).
void MatMulAccumulate(const Matrix& a, const Matrix& b, Matrix& out,
                      bool transpose_a = false, bool transpose_b = false);

Matrix Transpose(const Matrix& a);

}  // namespace hydra::tensor

#endif  // HYDRA_TENSOR_MATRIX_H_
