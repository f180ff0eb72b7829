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

#include <algorithm>
#include <cmath>

#include "rbd/mddp/solver.hpp"

namespace rbd::mddp {

namespace {

// One RK4 step of the state together with the first/second-order
// state-transition matrices of the discrete step map over z = [x; u].
// Evaluating the flow Jacobian/Hessian at the RK4 stage points and
// carrying stage-consistent STM values makes phi1 (and phi2, when
// requested) the exact derivatives of the discrete map, not an
// approximation of the continuous variational flow.
void rk4Step(const PhaseDynamics& dyn, VecX& x, const VecX& u, double h, int order, MatX* phi1,
             Tensor3* phi2) {
  const int nx = dyn.stateDim();
  if (order == 0) {
    FlowEval e;
    dyn.eval(x, u, 0, e);
    const VecX k1 = e.xdot;
    dyn.eval(x + 0.5 * h * k1, u, 0, e);
    const VecX k2 = e.xdot;
    dyn.eval(x + 0.5 * h * k2, u, 0, e);
    const VecX k3 = e.xdot;
    dyn.eval(x + h * k3, u, 0, e);
    const VecX k4 = e.xdot;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return;
  }

  const int N = static_cast<int>(phi1->cols());
  VecX k[4];
  MatX pk[4];   // nx x N stage STM derivatives
  Tensor3 tk[4];
  FlowEval e;
  VecX xs = x;
  MatX ps = *phi1;
  Tensor3 ts;
  if (order >= 2) ts = *phi2;
  const double stageScale[4] = {0.0, 0.5, 0.5, 1.0};
  for (int s = 0; s < 4; ++s) {
    if (s > 0) {
      xs = x + stageScale[s] * h * k[s - 1];
      ps = *phi1;
      ps.topRows(nx) += stageScale[s] * h * pk[s - 1];
      if (order >= 2) {
        ts = *phi2;
        for (int p = 0; p < N; ++p) {
          ts.page(p).topRows(nx) += stageScale[s] * h * tk[s - 1].page(p);
        }
      }
    }
    dyn.eval(xs, u, order, e);
    k[s] = e.xdot;
    pk[s] = e.fz * ps;
    if (order >= 2) {
      tk[s] = matrixTensorProduct(e.fz, ts);
      tk[s] += tensorBilinearProduct(e.fzz, ps, ps);
    }
  }
  x += (h / 6.0) * (k[0] + 2.0 * k[1] + 2.0 * k[2] + k[3]);
  phi1->topRows(nx) += (h / 6.0) * (pk[0] + 2.0 * pk[1] + 2.0 * pk[2] + pk[3]);
  if (order >= 2) {
    for (int p = 0; p < N; ++p) {
      phi2->page(p).topRows(nx) +=
          (h / 6.0) * (tk[0].page(p) + 2.0 * tk[1].page(p) + 2.0 * tk[2].page(p) + tk[3].page(p));
    }
  }
}

}  // namespace

Tensor3 qnUpdateSoStm(const MatX& phi1New, const MatX& phi1Old, const VecX& zNew,
                      const VecX& zOld, const Tensor3& phi2Old, double skipThreshold) {
  const VecX dz = zNew - zOld;
  const double norm2 = dz.squaredNorm();
  if (norm2 < skipThreshold * skipThreshold) return phi2Old;
  const MatX residual = phi1New - phi1Old - contractPages(phi2Old, dz);
  Tensor3 out = phi2Old;
  for (int p = 0; p < out.pages(); ++p) out.page(p) += residual * (dz(p) / norm2);
  return out;
}

static void rolloutLegs(const Problem& problem, const Iterate& iterate, int order,
                        const Rollout* previous, double qnSkipThreshold,
                        const std::vector<LegLayout>& layout, Rollout& out) {
  const int nx = problem.nx();
  const int nu = problem.nu();
  const int N = nx + nu;
  for (size_t l = 0; l < layout.size(); ++l) {
    const Phase& phase = problem.phases[layout[l].phase];
    const PhaseDynamics& dyn = *phase.dynamics;
    const double h = phase.duration / phase.segments / phase.stepsPerSegment;
    VecX x = iterate.legStates[l];
    LegData& leg = out.legs[l];
    leg.segments.resize(layout[l].segments);
    for (int s = 0; s < layout[l].segments; ++s) {
      SegmentData& seg = leg.segments[s];
      seg.x0 = x;
      seg.u = iterate.controls[l][s];
      const int knotOrder = (order == 0 || dyn.contactDim() == 0) ? 0 : 2;
      dyn.eval(seg.x0, seg.u, knotOrder, seg.knot);
      if (order >= 1) {
        seg.phi1 = MatX::Identity(N, N);
        if (order >= 2) seg.phi2 = Tensor3::Zero(N, N, N);
      }
      for (int step = 0; step < phase.stepsPerSegment; ++step) {
        rk4Step(dyn, x, seg.u, h, order, order >= 1 ? &seg.phi1 : nullptr,
                order >= 2 ? &seg.phi2 : nullptr);
      }
      seg.xEnd = x;
      if (order == 1) {
        if (previous != nullptr && l < previous->legs.size() &&
            s < static_cast<int>(previous->legs[l].segments.size())) {
          const SegmentData& prev = previous->legs[l].segments[s];
          VecX zNew(N), zOld(N);
          zNew << seg.x0, seg.u;
          zOld << prev.x0, prev.u;
          seg.phi2 =
              qnUpdateSoStm(seg.phi1, prev.phi1, zNew, zOld, prev.phi2, qnSkipThreshold);
        } else {
          seg.phi2 = Tensor3::Zero(N, N, N);
        }
      }
      if (!x.allFinite()) {
        out.finite = false;
        return;
      }
    }
    leg.xEnd = x;
  }
}

Rollout rolloutTrajectory(const Problem& problem, const Iterate& iterate, int order,
                          const Rollout* previous, double qnSkipThreshold) {
  const std::vector<LegLayout> layout = legLayout(problem);
  Rollout out;
  out.legs.resize(layout.size());
  // A line-search candidate can drive a leg through a kinematic singularity;
  // report it as a non-finite rollout instead of unwinding past the solver.
  try {
    rolloutLegs(problem, iterate, order, previous, qnSkipThreshold, layout, out);
  } catch (const SingularContactError&) {
    out.finite = false;
  }
  return out;
}

MeritEval evaluateMerit(const Problem& problem, const Iterate& iterate, const Rollout& rollout,
                        const AugLagState& al) {
  const std::vector<LegLayout> layout = legLayout(problem);
  MeritEval out;
  if (!rollout.finite) {
    out.finite = false;
    return out;
  }
  const double c = al.penalty;
  for (size_t l = 0; l < layout.size(); ++l) {
    const Phase& phase = problem.phases[layout[l].phase];
    const double dt = phase.duration / phase.segments;
    const LegData& leg = rollout.legs[l];
    for (size_t s = 0; s < leg.segments.size(); ++s) {
      const SegmentData& seg = leg.segments[s];
      const VecX dx = seg.x0 - phase.cost.xref;
      double stage = dx.dot(phase.cost.Q * dx) + seg.u.dot(phase.cost.R * seg.u);
      if (phase.cost.S.size() > 0 && seg.knot.lambda.size() > 0) {
        stage += seg.knot.lambda.dot(phase.cost.S * seg.knot.lambda);
      }
      out.cost += dt * stage;
      if (phase.path.dim() > 0) {
        VecX g = phase.path.c0;
        if (phase.path.cx.size() > 0) g += phase.path.cx * seg.x0;
        if (phase.path.cu.size() > 0) g += phase.path.cu * seg.u;
        if (phase.path.clam.size() > 0) g += phase.path.clam * seg.knot.lambda;
        const VecX& mu = al.pathMultipliers[l][s];
        for (int i = 0; i < g.size(); ++i) {
          out.violation = std::max(out.violation, g(i));
          const double a = std::max(0.0, mu(i) + c * g(i));
          out.merit += (a * a - mu(i) * mu(i)) / (2.0 * c);
        }
      }
    }
    if (layout[l].phaseEnd && phase.cost.Qf.size() > 0) {
      const VecX dxf = leg.xEnd - phase.cost.xrefF;
      out.cost += dxf.dot(phase.cost.Qf * dxf);
    }
    const BoundaryConstraint bc = legBoundary(problem, layout, static_cast<int>(l));
    if (bc.dim > 0) {
      const VecX sn = (l + 1 < layout.size()) ? iterate.legStates[l + 1] : VecX();
      const VecX psi = bc.value(leg.xEnd, sn);
      out.violation = std::max(out.violation, psi.lpNorm<Eigen::Infinity>());
      out.merit += -al.boundaryMultipliers[l].dot(psi) + 0.5 * c * psi.squaredNorm();
    }
  }
  out.merit += out.cost;
  out.finite = std::isfinite(out.merit);
  return out;
}

}  // namespace rbd::mddp
