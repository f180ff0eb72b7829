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

#include <cmath>

#include "doctest.h"
#include "rbd/diff_oracle.hpp"

using namespace rbd;

TEST_CASE("jacobian of a linear map is exact") {
  const MatX A = MatX::Random(4, 3);
  const VecX x = VecX::Random(3);
  const MatX jac = oracleJacobian([&](const VecX& v) { return VecX(A * v); }, x);
  CHECK((jac - A).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("jacobian of elementwise sine at zero is the identity") {
  const VecX x = VecX::Zero(3);
  const MatX jac =
      oracleJacobian([](const VecX& v) { return VecX(v.array().sin().matrix()); }, x);
  CHECK((jac - MatX::Identity(3, 3)).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("richardson extrapolation on the exponential") {
  VecX x(1);
  x << 0.0;
  const MatX jac =
      oracleJacobian([](const VecX& v) { return VecX(v.array().exp().matrix()); }, x);
  CHECK(std::abs(jac(0, 0) - 1.0) < 1e-10);
}

TEST_CASE("polynomial self-test for first and second order") {
  // f(x) = [x0^3 + 2 x0 x1, x1^2 - x0] has closed-form derivatives.
  auto f = [](const VecX& v) {
    VecX out(2);
    out << v(0) * v(0) * v(0) + 2 * v(0) * v(1), v(1) * v(1) - v(0);
    return out;
  };
  VecX x(2);
  x << 0.7, -0.4;
  const MatX jac = oracleJacobian(f, x);
  MatX expected(2, 2);
  expected << 3 * x(0) * x(0) + 2 * x(1), 2 * x(0), -1, 2 * x(1);
  CHECK((jac - expected).lpNorm<Eigen::Infinity>() < 1e-9);

  const Tensor3 hess = oracleHessianTensor(VectorFunction(f), x);
  // d2 f0 = [[6 x0, 2], [2, 0]]; d2 f1 = [[0,0],[0,2]].
  CHECK(std::abs(hess(0, 0, 0) - 6 * x(0)) < 1e-7);
  CHECK(std::abs(hess(0, 0, 1) - 2.0) < 1e-7);
  CHECK(std::abs(hess(0, 1, 0) - 2.0) < 1e-7);
  CHECK(std::abs(hess(1, 1, 1) - 2.0) < 1e-7);
  CHECK(std::abs(hess(1, 0, 0)) < 1e-7);
}

TEST_CASE("hessian of a linear function vanishes") {
  const MatX A = MatX::Random(3, 4);
  const VecX x = VecX::Random(4);
  const Tensor3 hess =
      oracleHessianTensor(VectorFunction([&](const VecX& v) { return VecX(A * v); }), x);
  CHECK(hess.maxAbs() < 1e-7);
}

TEST_CASE("cross second derivative of x*y^2") {
  auto f = [](const VecX& u, const VecX& w) {
    VecX out(1);
    out << u(0) * w(0) * w(0);
    return out;
  };
  VecX x(1), y(1);
  x << 2.0;
  y << 3.0;
  // d2 f / dx dy = 2 y.
  const Tensor3 cross = oracleHessianTensor(VectorFunction2(f), x, y);
  CHECK(std::abs(cross(0, 0, 0) - 2 * y(0)) < 1e-7);
}

TEST_CASE("numerical hessian is symmetric on smooth functions") {
  auto f = [](const VecX& v) {
    VecX out(1);
    out << std::sin(v(0)) * std::cos(v(1)) + v(0) * v(1) * v(1);
    return out;
  };
  VecX x(2);
  x << 0.3, -0.8;
  const Tensor3 hess = oracleHessianTensor(VectorFunction(f), x);
  CHECK(std::abs(hess(0, 0, 1) - hess(0, 1, 0)) < 1e-6);
}
