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

#include "rbd/deriv_first_order.hpp"

#include <Eigen/LU>

#include "rbd/detail/deriv_core.hpp"

namespace rbd {

IdFoBlocks idFoDerivatives(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                           const VecX& qd, const VecX& qdd, const VecX& lambda) {
  detail::DerivCore core;
  core.compute(tree, contacts, q, qd, qdd, lambda, {});
  return {core.dtauDq, core.dtauDqd};
}

Tensor3 fextCumulativeFo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                         const VecX& lambda) {
  detail::DerivCore core;
  const int n = tree.nv();
  core.compute(tree, contacts, q, VecX::Zero(n), VecX::Zero(n), lambda, {});
  Tensor3 out = Tensor3::Zero(6, n, tree.numBodies());
  for (int i = 0; i < tree.numBodies(); ++i)
    for (int j = 0; j < n; ++j) out.page(i).col(j) = core.dFextCum[i * n + j];
  return out;
}

KktFoBlocks kktFdFo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                    const VecX& qd, const VecX& tau) {
  const int n = tree.nv();
  const int nc = totalConstraintDim(contacts);
  const KktSolution sol = kktForwardDynamics(tree, contacts, q, qd, tau);

  detail::DerivCore core;
  core.compute(tree, contacts, q, qd, sol.qdd, sol.lambda, {});

  MatX K(n + nc, n + nc);
  K.setZero();
  K.topLeftCorner(n, n) = core.M;
  K.bottomLeftCorner(nc, n) = core.Jc;
  K.topRightCorner(n, nc) = core.Jc.transpose();
  Eigen::PartialPivLU<MatX> lu(K);

  KktFoBlocks out;
  out.qdd0 = sol.qdd;
  out.lambda0 = sol.lambda;

  MatX rhsQ(n + nc, n);
  rhsQ.topRows(n) = core.dtauDq;
  rhsQ.bottomRows(nc) = core.dAccDq;
  out.daDq = -lu.solve(rhsQ);

  MatX rhsQd(n + nc, n);
  rhsQd.topRows(n) = core.dtauDqd;
  rhsQd.bottomRows(nc) = core.dAccDqd;
  out.daDqd = -lu.solve(rhsQd);

  MatX rhsTau = MatX::Zero(n + nc, tree.numActuated());
  rhsTau.topRows(n) = tree.actuationSelector;
  out.daDtau = lu.solve(rhsTau);
  return out;
}

ContactPathFo contactPathFo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                            const VecX& qd, const VecX& qdd) {
  detail::DerivCore core;
  const int nc = totalConstraintDim(contacts);
  core.compute(tree, contacts, q, qd, qdd, VecX::Zero(nc), {});
  ContactPathFo out;
  out.dConstraintDq = core.dAccDq;
  out.dJdotQdDqd = core.dAccDqd;
  // Remove the d(Jc qdd)/dq part to isolate the velocity-product term.
  out.dJdotQdDq = core.dAccDq;
  for (int e = 0; e < core.n; ++e) {
    out.dJdotQdDq.col(e) -= core.dJc.page(e) * qdd;
  }
  return out;
}

ImpactFoBlocks impactFo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                        const VecX& qdMinus, double e) {
  const int n = tree.nv();
  const int nc = totalConstraintDim(contacts);
  const ImpactSolution sol = impactDynamics(tree, contacts, q, qdMinus, e);

  // The impulse balance M(qd_plus - qd_minus) = Jc^T lambda_hat is the
  // inverse-dynamics residual at zero velocity, zero gravity, with
  // qdd := qd_plus - qd_minus; reuse the same derivative sweep.
  detail::DerivCore core;
  detail::DerivCoreOptions opts;
  opts.withGravity = false;
  core.compute(tree, contacts, q, VecX::Zero(n), VecX(sol.qdPlus - qdMinus), sol.lambdaHat, opts);

  MatX K(n + nc, n + nc);
  K.setZero();
  K.topLeftCorner(n, n) = core.M;
  K.bottomLeftCorner(nc, n) = core.Jc;
  K.topRightCorner(n, nc) = core.Jc.transpose();
  Eigen::PartialPivLU<MatX> lu(K);

  ImpactFoBlocks out;
  out.qdPlus0 = sol.qdPlus;
  out.lambdaHat0 = sol.lambdaHat;

  // Velocity-level constraint residual Jc (qd_plus - e qd_minus).
  const VecX w = sol.qdPlus - e * qdMinus;
  MatX rhsQ(n + nc, n);
  rhsQ.topRows(n) = core.dtauDq;
  for (int g = 0; g < n; ++g) rhsQ.col(g).tail(nc) = core.dJc.page(g) * w;
  out.daDq = -lu.solve(rhsQ);

  MatX rhsQd(n + nc, n);
  rhsQd.topRows(n) = core.M;
  rhsQd.bottomRows(nc) = e * core.Jc;
  out.daDqdMinus = lu.solve(rhsQd);
  return out;
}

}  // namespace rbd
