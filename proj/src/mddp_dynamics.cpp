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

#include <utility>

#include "rbd/deriv_second_order.hpp"
#include "rbd/mddp/solver.hpp"

namespace rbd::mddp {

TreeDynamics::TreeDynamics(const KinematicTree& tree, ContactSet contacts)
    : tree_(tree), contacts_(std::move(contacts)) {}

int TreeDynamics::contactDim() const { return totalConstraintDim(contacts_); }

void TreeDynamics::eval(const VecX& x, const VecX& u, int order, FlowEval& out) const {
  const int n = tree_.nv();
  const int nx = 2 * n;
  const int nu = tree_.numActuated();
  const int N = nx + nu;
  const int nc = contactDim();
  const VecX q = x.head(n);
  const VecX qd = x.tail(n);

  out.xdot.resize(nx);
  out.xdot.head(n) = qd;
  if (order == 0) {
    if (contacts_.empty()) {
      out.xdot.tail(n) = forwardDynamics(tree_, q, qd, u);
      out.lambda.resize(0);
    } else {
      const KktSolution sol = kktForwardDynamics(tree_, contacts_, q, qd, u);
      out.xdot.tail(n) = sol.qdd;
      out.lambda = sol.lambda;
    }
    return;
  }

  const KktFoBlocks fo = kktFdFo(tree_, contacts_, q, qd, u);
  out.xdot.tail(n) = fo.qdd0;
  out.lambda = fo.lambda0;

  // Stacked rows [qdd; -lambda]; qd rows of xdot are linear in z.
  out.fz = MatX::Zero(nx, N);
  out.fz.block(0, n, n, n).setIdentity();
  out.fz.block(n, 0, n, n) = fo.daDq.topRows(n);
  out.fz.block(n, n, n, n) = fo.daDqd.topRows(n);
  out.fz.block(n, nx, n, nu) = fo.daDtau.topRows(n);
  out.lambdaZ.resize(nc, N);
  out.lambdaZ.leftCols(n) = -fo.daDq.bottomRows(nc);
  out.lambdaZ.middleCols(n, n) = -fo.daDqd.bottomRows(nc);
  out.lambdaZ.rightCols(nu) = -fo.daDtau.bottomRows(nc);
  if (order == 1) return;

  const KktSoBlocks so = kktFdSo(tree_, contacts_, q, qd, u, fo);
  Tensor3 stacked(n + nc, N, N);
  for (int r = 0; r < n + nc; ++r) {
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        stacked(r, j, k) = 0.5 * (so.qq(r, j, k) + so.qq(r, k, j));
        const double qdqVal = so.qdq(r, j, k);
        stacked(r, n + j, k) = qdqVal;
        stacked(r, k, n + j) = qdqVal;
        const double qdqdVal = 0.5 * (so.qdqd(r, j, k) + so.qdqd(r, k, j));
        stacked(r, n + j, n + k) = qdqdVal;
      }
      for (int j = 0; j < nu; ++j) {
        const double tq = so.tauq(r, j, k);
        stacked(r, nx + j, k) = tq;
        stacked(r, k, nx + j) = tq;
      }
    }
  }
  out.fzz = Tensor3::Zero(nx, N, N);
  out.lambdaZz = Tensor3::Zero(nc, N, N);
  for (int k = 0; k < N; ++k) {
    out.fzz.page(k).bottomRows(n) = stacked.page(k).topRows(n);
    out.lambdaZz.page(k) = -stacked.page(k).bottomRows(nc);
  }
}

BoundaryConstraint linkageConstraint(const MatX& sel) {
  BoundaryConstraint bc;
  bc.dim = static_cast<int>(sel.rows());
  bc.value = [sel](const VecX& xe, const VecX& sn) { return VecX(sel * (sn - xe)); };
  bc.jacobian = [sel](const VecX&, const VecX&, MatX& jx, MatX& js) {
    jx = -sel;
    js = sel;
  };
  return bc;
}

std::vector<LegLayout> legLayout(const Problem& problem) {
  std::vector<LegLayout> out;
  for (int p = 0; p < static_cast<int>(problem.phases.size()); ++p) {
    const Phase& phase = problem.phases[p];
    const int legs = std::max(1, phase.legs);
    const int base = phase.segments / legs;
    const int extra = phase.segments % legs;
    for (int l = 0; l < legs; ++l) {
      LegLayout leg;
      leg.phase = p;
      leg.segments = base + (l < extra ? 1 : 0);
      leg.phaseEnd = (l == legs - 1);
      out.push_back(leg);
    }
  }
  return out;
}

BoundaryConstraint legBoundary(const Problem& problem, const std::vector<LegLayout>& layout,
                               int leg) {
  if (layout[leg].phaseEnd) return problem.phases[layout[leg].phase].boundary;
  return linkageConstraint(MatX::Identity(problem.nx(), problem.nx()));
}

Iterate zeroControlIterate(const Problem& problem) {
  const std::vector<LegLayout> layout = legLayout(problem);
  Iterate it;
  it.legStates.resize(layout.size());
  it.controls.resize(layout.size());
  for (size_t l = 0; l < layout.size(); ++l) {
    const Phase& phase = problem.phases[layout[l].phase];
    it.legStates[l] = (l == 0) ? problem.initialState : phase.cost.xref;
    it.controls[l].assign(layout[l].segments, VecX::Zero(problem.nu()));
  }
  return it;
}

}  // namespace rbd::mddp
