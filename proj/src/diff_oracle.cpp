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

#include "rbd/diff_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace rbd {

namespace {

void checkFinite(const VecX& v) {
  if (!v.allFinite()) throw std::runtime_error("oracle: non-finite function value");
}

MatX centralJacobian(const VectorFunction& f, const VecX& x, double h) {
  const int n = static_cast<int>(x.size());
  MatX jac;
  for (int j = 0; j < n; ++j) {
    VecX xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const VecX fp = f(xp);
    const VecX fm = f(xm);
    checkFinite(fp);
    checkFinite(fm);
    if (jac.size() == 0) jac.resize(fp.size(), n);
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

}  // namespace

MatX oracleJacobian(const VectorFunction& f, const VecX& x, const OracleConfig& cfg) {
  const MatX coarse = centralJacobian(f, x, cfg.foStep);
  if (!cfg.richardson) return coarse;
  const MatX fine = centralJacobian(f, x, cfg.foStep / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

Tensor3 oracleHessianTensor(const VectorFunction2& f, const VecX& x, const VecX& y,
                            const OracleConfig& cfg) {
  const int nx = static_cast<int>(x.size());
  const int ny = static_cast<int>(y.size());
  const double h = cfg.soStep;
  Tensor3 out;
  for (int k = 0; k < ny; ++k) {
    VecX yp = y, ym = y;
    yp(k) += h;
    ym(k) -= h;
    for (int j = 0; j < nx; ++j) {
      VecX xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const VecX fpp = f(xp, yp);
      const VecX fpm = f(xp, ym);
      const VecX fmp = f(xm, yp);
      const VecX fmm = f(xm, ym);
      checkFinite(fpp);
      checkFinite(fmm);
      const VecX d = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      if (out.rows() == 0) out = Tensor3::Zero(static_cast<int>(d.size()), nx, ny);
      out.page(k).col(j) = d;
    }
  }
  return out;
}

Tensor3 oracleHessianTensor(const VectorFunction& f, const VecX& x, const OracleConfig& cfg) {
  // Route the same-variable case through the two-block form by splitting
  // the perturbation: g(u, w) = f(x + (u - x) + (w - x)).
  VectorFunction2 g = [&](const VecX& u, const VecX& w) { return f(u + w - x); };
  return oracleHessianTensor(g, x, x, cfg);
}

double relativeError(const MatX& analytic, const MatX& oracle) {
  const double scale = std::max(1.0, oracle.lpNorm<Eigen::Infinity>());
  return (analytic - oracle).lpNorm<Eigen::Infinity>() / scale;
}

double relativeError(const Tensor3& analytic, const Tensor3& oracle) {
  Tensor3 diff = analytic;
  diff -= oracle;
  return diff.maxAbs() / std::max(1.0, oracle.maxAbs());
}

}  // namespace rbd
