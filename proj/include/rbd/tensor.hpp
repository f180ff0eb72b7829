// Copyright 2025 The rbdopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RBD_TENSOR_HPP_
#define RBD_TENSOR_HPP_

#include <vector>

#include <Eigen/Dense>

namespace rbd {

// Dense 3-D tensor, rows x columns x pages, rows fastest. Each page is a
// column-major matrix; pages index the differentiation variable named
// last in a mixed second derivative.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d1, int d2, int d3)
      : d1_(d1), d2_(d2), d3_(d3), data_(static_cast<size_t>(d1) * d2 * d3, 0.0) {}

  static Tensor3 Zero(int d1, int d2, int d3) { return Tensor3(d1, d2, d3); }

  int rows() const { return d1_; }
  int cols() const { return d2_; }
  int pages() const { return d3_; }
  bool empty() const { return data_.empty(); }

  double& operator()(int i, int j, int k) {
    return data_[static_cast<size_t>(i) + static_cast<size_t>(d1_) * (j + static_cast<size_t>(d2_) * k)];
  }
  double operator()(int i, int j, int k) const {
    return data_[static_cast<size_t>(i) + static_cast<size_t>(d1_) * (j + static_cast<size_t>(d2_) * k)];
  }

  Eigen::Map<Eigen::MatrixXd> page(int k) {
    return {data_.data() + static_cast<size_t>(d1_) * d2_ * k, d1_, d2_};
  }
  Eigen::Map<const Eigen::MatrixXd> page(int k) const {
    return {data_.data() + static_cast<size_t>(d1_) * d2_ * k, d1_, d2_};
  }

  void setZero() { std::fill(data_.begin(), data_.end(), 0.0); }

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3 operator-() const;

  double maxAbs() const;
  double frobeniusNorm() const;

  const std::vector<double>& data() const { return data_; }

 private:
  int d1_ = 0, d2_ = 0, d3_ = 0;
  std::vector<double> data_;
};

// Swap columns and pages: out[i][k][j] = t[i][j][k].
Tensor3 tensorRot23(const Tensor3& t);

// Page-wise products: (t * a).page(k) = t.page(k) * a and
// (a * t).page(k) = a * t.page(k).
Tensor3 tensorMatrixProduct(const Tensor3& t, const Eigen::MatrixXd& a);
Tensor3 matrixTensorProduct(const Eigen::MatrixXd& a, const Tensor3& t);

// Contractions with a vector:
//   contractCols: out(i, k) = sum_j t(i, j, k) * v(j)
//   contractPages: out(i, j) = sum_k t(i, j, k) * v(k)
Eigen::MatrixXd contractCols(const Tensor3& t, const Eigen::VectorXd& v);
Eigen::MatrixXd contractPages(const Tensor3& t, const Eigen::VectorXd& v);

// Stack two tensors along the row dimension (same cols/pages).
Tensor3 stackRows(const Tensor3& top, const Tensor3& bottom);

// Bilinear contraction of the column and page indices:
//   out(i, j, k) = sum_{m,n} t(i, m, n) * a(m, j) * b(n, k).
Tensor3 tensorBilinearProduct(const Tensor3& t, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

}  // namespace rbd

#endif  // RBD_TENSOR_HPP_
