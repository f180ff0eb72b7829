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

#include "rbd/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace rbd {

namespace {
void checkSameDims(const Tensor3& a, const Tensor3& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.pages() != b.pages()) {
    throw std::invalid_argument("Tensor3: dimension mismatch");
  }
}
}  // namespace

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  checkSameDims(*this, other);
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  checkSameDims(*this, other);
  for (size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor3 Tensor3::operator-() const {
  Tensor3 out(d1_, d2_, d3_);
  for (size_t i = 0; i < data_.size(); ++i) out.data_[i] = -data_[i];
  return out;
}

double Tensor3::maxAbs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Tensor3::frobeniusNorm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Tensor3 tensorRot23(const Tensor3& t) {
  Tensor3 out(t.rows(), t.pages(), t.cols());
  for (int k = 0; k < t.pages(); ++k)
    for (int j = 0; j < t.cols(); ++j)
      for (int i = 0; i < t.rows(); ++i) out(i, k, j) = t(i, j, k);
  return out;
}

Tensor3 tensorMatrixProduct(const Tensor3& t, const Eigen::MatrixXd& a) {
  if (t.cols() != a.rows()) throw std::invalid_argument("tensorMatrixProduct: inner dims");
  Tensor3 out(t.rows(), static_cast<int>(a.cols()), t.pages());
  for (int k = 0; k < t.pages(); ++k) out.page(k) = t.page(k) * a;
  return out;
}

Tensor3 matrixTensorProduct(const Eigen::MatrixXd& a, const Tensor3& t) {
  if (a.cols() != t.rows()) throw std::invalid_argument("matrixTensorProduct: inner dims");
  Tensor3 out(static_cast<int>(a.rows()), t.cols(), t.pages());
  for (int k = 0; k < t.pages(); ++k) out.page(k) = a * t.page(k);
  return out;
}

Eigen::MatrixXd contractCols(const Tensor3& t, const Eigen::VectorXd& v) {
  if (t.cols() != v.size()) throw std::invalid_argument("contractCols: dims");
  Eigen::MatrixXd out(t.rows(), t.pages());
  for (int k = 0; k < t.pages(); ++k) out.col(k) = t.page(k) * v;
  return out;
}

Eigen::MatrixXd contractPages(const Tensor3& t, const Eigen::VectorXd& v) {
  if (t.pages() != v.size()) throw std::invalid_argument("contractPages: dims");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t.rows(), t.cols());
  for (int k = 0; k < t.pages(); ++k) out += t.page(k) * v(k);
  return out;
}

Tensor3 stackRows(const Tensor3& top, const Tensor3& bottom) {
  if (top.cols() != bottom.cols() || top.pages() != bottom.pages()) {
    throw std::invalid_argument("stackRows: dims");
  }
  Tensor3 out(top.rows() + bottom.rows(), top.cols(), top.pages());
  for (int k = 0; k < out.pages(); ++k) {
    out.page(k).topRows(top.rows()) = top.page(k);
    out.page(k).bottomRows(bottom.rows()) = bottom.page(k);
  }
  return out;
}

Tensor3 tensorBilinearProduct(const Tensor3& t, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  if (t.cols() != a.rows() || t.pages() != b.rows()) {
    throw std::invalid_argument("tensorBilinearProduct: dims");
  }
  // Cache t.page(n) * a once per page of t, then mix pages with b.
  std::vector<Eigen::MatrixXd> mixed(t.pages());
  for (int n = 0; n < t.pages(); ++n) mixed[n] = t.page(n) * a;
  Tensor3 out(t.rows(), static_cast<int>(a.cols()), static_cast<int>(b.cols()));
  for (int k = 0; k < out.pages(); ++k) {
    auto page = out.page(k);
    for (int n = 0; n < t.pages(); ++n) page += mixed[n] * b(n, k);
  }
  return out;
}

}  // namespace rbd
