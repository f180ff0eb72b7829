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

#include <Eigen/Cholesky>
#include <algorithm>

#include "rbd/mddp/solver.hpp"

namespace rbd::mddp {

namespace {

MatX rowSlice(const Tensor3& t, int i) {
  MatX out(t.cols(), t.pages());
  for (int k = 0; k < t.pages(); ++k) {
    for (int j = 0; j < t.cols(); ++j) out(j, k) = t(i, j, k);
  }
  return out;
}

// Gradient and Hessian of the augmented knot cost (running cost plus PHR
// inequality terms) with respect to z = [x; u], chaining through the
// contact-force observable.
void knotCostPartials(const Phase& phase, const SegmentData& seg, const VecX& mu, double c,
                      int nx, int nu, VecX& lz, MatX& lzz) {
  const int N = nx + nu;
  const double dt = phase.duration / phase.segments;
  lz = VecX::Zero(N);
  lzz = MatX::Zero(N, N);
  const VecX dx = seg.x0 - phase.cost.xref;
  lz.head(nx) = 2.0 * dt * (phase.cost.Q * dx);
  lz.tail(nu) = 2.0 * dt * (phase.cost.R * seg.u);
  lzz.topLeftCorner(nx, nx) = 2.0 * dt * phase.cost.Q;
  lzz.bottomRightCorner(nu, nu) = 2.0 * dt * phase.cost.R;
  const int nc = static_cast<int>(seg.knot.lambda.size());
  if (phase.cost.S.size() > 0 && nc > 0) {
    const VecX sl = phase.cost.S * seg.knot.lambda;
    lz += 2.0 * dt * (seg.knot.lambdaZ.transpose() * sl);
    lzz += 2.0 * dt * (seg.knot.lambdaZ.transpose() * phase.cost.S * seg.knot.lambdaZ);
    for (int i = 0; i < nc; ++i) lzz += 2.0 * dt * sl(i) * rowSlice(seg.knot.lambdaZz, i);
  }
  const int m = phase.path.dim();
  if (m > 0) {
    VecX g = phase.path.c0;
    MatX gz = MatX::Zero(m, N);
    if (phase.path.cx.size() > 0) {
      g += phase.path.cx * seg.x0;
      gz.leftCols(nx) += phase.path.cx;
    }
    if (phase.path.cu.size() > 0) {
      g += phase.path.cu * seg.u;
      gz.rightCols(nu) += phase.path.cu;
    }
    if (phase.path.clam.size() > 0 && nc > 0) {
      g += phase.path.clam * seg.knot.lambda;
      gz += phase.path.clam * seg.knot.lambdaZ;
    }
    for (int i = 0; i < m; ++i) {
      const double a = mu(i) + c * g(i);
      if (a <= 0.0) continue;
      lz += a * gz.row(i).transpose();
      lzz += c * (gz.row(i).transpose() * gz.row(i));
      if (phase.path.clam.size() > 0 && nc > 0) {
        for (int j = 0; j < nc; ++j) {
          const double w = a * phase.path.clam(i, j);
          if (w != 0.0) lzz += w * rowSlice(seg.knot.lambdaZz, j);
        }
      }
    }
  }
}

}  // namespace

Sweep backwardSweep(const Problem& problem, const Iterate& iterate, const Rollout& rollout,
                    const AugLagState& al, double shift) {
  const std::vector<LegLayout> layout = legLayout(problem);
  const int L = static_cast<int>(layout.size());
  const int nx = problem.nx();
  const int nu = problem.nu();
  const double c = al.penalty;
  Sweep sweep;
  sweep.gains.resize(L);
  sweep.boundary.resize(L);

  VecX vsNext;   // value gradient at the next leg's start
  MatX vssNext;  // value Hessian at the next leg's start
  for (int l = L - 1; l >= 0; --l) {
    const Phase& phase = problem.phases[layout[l].phase];
    const LegData& leg = rollout.legs[l];
    const int ns = (l < L - 1) ? nx : 0;

    // Boundary value function W(dx_e, ds_next).
    VecX wx = VecX::Zero(nx);
    MatX wxx = MatX::Zero(nx, nx);
    VecX ws = VecX::Zero(ns);
    MatX wss = MatX::Zero(ns, ns);
    MatX wxs = MatX::Zero(nx, ns);
    if (layout[l].phaseEnd && phase.cost.Qf.size() > 0) {
      wx += 2.0 * (phase.cost.Qf * (leg.xEnd - phase.cost.xrefF));
      wxx += 2.0 * phase.cost.Qf;
    }
    const BoundaryConstraint bc = legBoundary(problem, layout, l);
    if (bc.dim > 0) {
      const VecX sn = (l < L - 1) ? iterate.legStates[l + 1] : VecX();
      const VecX psi = bc.value(leg.xEnd, sn);
      MatX jx, js;
      bc.jacobian(leg.xEnd, sn, jx, js);
      const VecX gAl = c * psi - al.boundaryMultipliers[l];
      wx += jx.transpose() * gAl;
      wxx += c * (jx.transpose() * jx);
      if (ns > 0) {
        ws += js.transpose() * gAl;
        wss += c * (js.transpose() * js);
        wxs += c * (jx.transpose() * js);
      }
      // Gauss-Newton constraint Hessian: the exact curvature term
      // sum_i gAl(i) * hessianXx(i) is indefinite and forces a large
      // Levenberg shift for the whole sweep; dropping it keeps the
      // boundary block PSD and the full Newton step usable.
    }
    if (l < L - 1) {
      ws += vsNext;
      wss += vssNext;
    }

    VecX vx;
    MatX vxx;
    if (ns > 0) {
      MatX wssShifted = wss + shift * MatX::Identity(ns, ns);
      Eigen::LLT<MatX> llt(wssShifted);
      if (llt.info() != Eigen::Success) return sweep;
      BoundaryGains bg;
      bg.ks = -llt.solve(ws);
      bg.Ks = -llt.solve(wxs.transpose());
      sweep.predictedReduction -= bg.ks.dot(ws) + 0.5 * bg.ks.dot(wss * bg.ks);
      vx = wx + wxs * bg.ks + bg.Ks.transpose() * (ws + wss * bg.ks);
      vxx = wxx + wxs * bg.Ks + bg.Ks.transpose() * wxs.transpose() +
            bg.Ks.transpose() * wss * bg.Ks;
      vxx = 0.5 * (vxx + vxx.transpose()).eval();
      sweep.boundary[l] = std::move(bg);
    } else {
      vx = wx;
      vxx = wxx;
    }

    // Backward over the leg's segments.
    sweep.gains[l].resize(leg.segments.size());
    for (int s = static_cast<int>(leg.segments.size()) - 1; s >= 0; --s) {
      const SegmentData& seg = leg.segments[s];
      VecX lz;
      MatX lzz;
      knotCostPartials(phase, seg, al.pathMultipliers[l][s], c, nx, nu, lz, lzz);
      const int N = nx + nu;
      const MatX fz = seg.phi1.topRows(nx);
      MatX vtens = MatX::Zero(N, N);
      for (int p = 0; p < N; ++p) {
        vtens.col(p) = seg.phi2.page(p).topRows(nx).transpose() * vx;
      }
      const VecX qz = lz + fz.transpose() * vx;
      MatX qzz = lzz + fz.transpose() * vxx * fz + vtens;
      qzz = 0.5 * (qzz + qzz.transpose()).eval();

      const VecX qx = qz.head(nx);
      const VecX qu = qz.tail(nu);
      const MatX qxx = qzz.topLeftCorner(nx, nx);
      const MatX qux = qzz.bottomLeftCorner(nu, nx);
      const MatX quu = qzz.bottomRightCorner(nu, nu);
      Eigen::LLT<MatX> llt(MatX(quu + shift * MatX::Identity(nu, nu)));
      if (llt.info() != Eigen::Success) return sweep;
      SegmentGains sg;
      sg.kff = -llt.solve(qu);
      sg.K = -llt.solve(qux);
      sweep.predictedReduction -= sg.kff.dot(qu) + 0.5 * sg.kff.dot(quu * sg.kff);
      vx = qx + sg.K.transpose() * (quu * sg.kff + qu) + qux.transpose() * sg.kff;
      vxx = qxx + sg.K.transpose() * quu * sg.K + sg.K.transpose() * qux +
            qux.transpose() * sg.K;
      vxx = 0.5 * (vxx + vxx.transpose()).eval();
      sweep.gains[l][s] = std::move(sg);
    }
    vsNext = vx;
    vssNext = vxx;
  }
  sweep.ok = true;
  return sweep;
}

}  // namespace rbd::mddp
