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

// Numerical differentiation used as an independent oracle for every
// analytical derivative in the library.

#ifndef RBD_DIFF_ORACLE_HPP_
#define RBD_DIFF_ORACLE_HPP_

#include <functional>

#include "rbd/spatial.hpp"
#include "rbd/tensor.hpp"

namespace rbd {

struct OracleConfig {
  // Richardson-extrapolated central differences by default.
  bool richardson = true;
  double foStep = 1e-6;
  double soStep = 1e-4;
  // Relative tolerances budgeting the oracle noise (the analytical
  // derivatives themselves are exact).
  double foTolerance = 1e-6;
  double soTolerance = 1e-4;
  double absoluteFloor = 1e-8;
};

using VectorFunction = std::function<VecX(const VecX&)>;
using VectorFunction2 = std::function<VecX(const VecX&, const VecX&)>;

// Numerical Jacobian of f at x.
MatX oracleJacobian(const VectorFunction& f, const VecX& x, const OracleConfig& cfg = {});

// Mixed second derivative tensor of f(x, y): out(i, j, k) = d2 f_i / dx_j dy_k
// (pages index the second variable).
Tensor3 oracleHessianTensor(const VectorFunction2& f, const VecX& x, const VecX& y,
                            const OracleConfig& cfg = {});

// Hessian of f w.r.t. a single variable: out(i, j, k) = d2 f_i / dx_j dx_k.
Tensor3 oracleHessianTensor(const VectorFunction& f, const VecX& x, const OracleConfig& cfg = {});

// Block-wise comparison metric: ||A - O||_inf / max(1, ||O||_inf).
double relativeError(const MatX& analytic, const MatX& oracle);
double relativeError(const Tensor3& analytic, const Tensor3& oracle);

}  // namespace rbd

#endif  // RBD_DIFF_ORACLE_HPP_
