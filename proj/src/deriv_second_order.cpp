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

#include "rbd/deriv_second_order.hpp"

#include <Eigen/LU>
#include <stdexcept>

#include "rbd/detail/deriv_core.hpp"
#include "rbd/dynamics.hpp"

namespace rbd {

namespace {

// Cross term of the implicit-function Hessian: page g holds T.page(g) * A,
// i.e. the e-th column is the contraction of dT/dq_g with the sensitivity
// column dA(:, e).
Tensor3 crossTerm(const Tensor3& t, const MatX& a) { return tensorMatrixProduct(t, a); }

// Per-page transpose: dJc (nc x n x n) -> dJc^T (n x nc x n).
Tensor3 pageTranspose(const Tensor3& t) {
  Tensor3 out(t.cols(), t.rows(), t.pages());
  for (int k = 0; k < t.pages(); ++k) out.page(k) = t.page(k).transpose();
  return out;
}

}  // namespace

IdSoBlocks idSoDerivatives(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                           const VecX& qd, const VecX& qdd, const VecX& lambda) {
  detail::DerivCore core;
  detail::DerivCoreOptions opts;
  opts.secondOrder = true;
  core.compute(tree, contacts, q, qd, qdd, lambda, opts);
  return {core.d2tauQq, core.d2tauQdQd, core.d2tauQdQ};
}

KktSoBlocks kktFdSo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                    const VecX& qd, const VecX& tau, const KktFoBlocks& fo) {
  const int n = tree.nv();
  const int nc = totalConstraintDim(contacts);
  const int na = tree.numActuated();

  detail::DerivCore core;
  detail::DerivCoreOptions opts;
  opts.secondOrder = true;
  core.compute(tree, contacts, q, qd, fo.qdd0, fo.lambda0, opts);

  // Guard against a first-order block evaluated elsewhere: the cached
  // (qdd0, lambda0) must satisfy the dynamics at (q, qd, tau).
  {
    const VecX residual =
        core.M * fo.qdd0 - core.Jc.transpose() * fo.lambda0 + biasForces(tree, q, qd) -
        tree.actuationSelector * tau;
    const double scale = std::max(1.0, fo.qdd0.lpNorm<Eigen::Infinity>());
    if (residual.lpNorm<Eigen::Infinity>() > 1e-7 * scale) {
      throw std::invalid_argument("kktFdSo: first-order blocks evaluated at a different point");
    }
  }

  MatX K = MatX::Zero(n + nc, n + nc);
  K.topLeftCorner(n, n) = core.M;
  K.bottomLeftCorner(nc, n) = core.Jc;
  K.topRightCorner(n, nc) = core.Jc.transpose();
  Eigen::PartialPivLU<MatX> lu(K);
  const MatX Kinv = lu.inverse();

  // Sensitivities of the two solution components.
  const MatX QddQ = fo.daDq.topRows(n);
  const MatX LamQ = -fo.daDq.bottomRows(nc);
  const MatX QddQd = fo.daDqd.topRows(n);
  const MatX LamQd = -fo.daDqd.bottomRows(nc);
  const MatX QddTau = fo.daDtau.topRows(n);
  const MatX LamTau = -fo.daDtau.bottomRows(nc);

  const Tensor3 dJcT = pageTranspose(core.dJc);

  KktSoBlocks out;

  // (q, q)
  {
    Tensor3 top = core.d2tauQq;
    const Tensor3 mTerm = crossTerm(core.dM, QddQ);
    const Tensor3 jTerm = crossTerm(dJcT, LamQ);
    top += mTerm;
    top += tensorRot23(mTerm);
    top -= jTerm;
    top -= tensorRot23(jTerm);
    Tensor3 bottom = core.d2accQq;
    const Tensor3 cTerm = crossTerm(core.dJc, QddQ);
    bottom += cTerm;
    bottom += tensorRot23(cTerm);
    out.qq = matrixTensorProduct(-Kinv, stackRows(top, bottom));
  }

  // (qd, qd)
  out.qdqd = matrixTensorProduct(-Kinv, stackRows(core.d2tauQdQd, core.d2accQdQd));

  // (qd, q): columns = qd, pages = q.
  {
    Tensor3 top = core.d2tauQdQ;
    top += crossTerm(core.dM, QddQd);
    top -= crossTerm(dJcT, LamQd);
    Tensor3 bottom = core.d2accQdQ;
    bottom += crossTerm(core.dJc, QddQd);
    out.qdq = matrixTensorProduct(-Kinv, stackRows(top, bottom));
  }
  out.qqd = tensorRot23(out.qdq);

  // (tau, q): columns = tau, pages = q.
  {
    Tensor3 top = crossTerm(core.dM, QddTau);
    top -= crossTerm(dJcT, LamTau);
    const Tensor3 bottom = crossTerm(core.dJc, QddTau);
    out.tauq = matrixTensorProduct(-Kinv, stackRows(top, bottom));
  }

  out.qdtau = Tensor3::Zero(n + nc, n, na);
  out.tautau = Tensor3::Zero(n + nc, na, na);
  return out;
}

ContactPathSo contactPathSo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                            const VecX& qd, const VecX& qdd) {
  detail::DerivCore core;
  detail::DerivCoreOptions opts;
  opts.secondOrder = true;
  const int nc = totalConstraintDim(contacts);
  core.compute(tree, contacts, q, qd, qdd, VecX::Zero(nc), opts);

  ContactPathSo out;
  out.d2ConstraintQq = core.d2accQq;
  out.d2JdotQdQdQd = core.d2accQdQd;
  out.d2JdotQdQdQ = core.d2accQdQ;
  return out;
}

ImpactSoBlocks impactSo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                        const VecX& qdMinus, double e, const ImpactFoBlocks& fo) {
  const int n = tree.nv();
  const int nc = totalConstraintDim(contacts);

  detail::DerivCore core;
  detail::DerivCoreOptions opts;
  opts.secondOrder = true;
  opts.withGravity = false;
  core.compute(tree, contacts, q, VecX::Zero(n), VecX(fo.qdPlus0 - qdMinus), fo.lambdaHat0, opts);

  MatX K = MatX::Zero(n + nc, n + nc);
  K.topLeftCorner(n, n) = core.M;
  K.bottomLeftCorner(nc, n) = core.Jc;
  K.topRightCorner(n, nc) = core.Jc.transpose();
  Eigen::PartialPivLU<MatX> lu(K);
  const MatX Kinv = lu.inverse();

  const MatX QpQ = fo.daDq.topRows(n);
  const MatX LamQ = -fo.daDq.bottomRows(nc);
  const MatX QpQd = fo.daDqdMinus.topRows(n);
  const MatX LamQd = -fo.daDqdMinus.bottomRows(nc);

  const Tensor3 dJcT = pageTranspose(core.dJc);
  const VecX w = fo.qdPlus0 - e * qdMinus;

  ImpactSoBlocks out;

  // (q, q)
  {
    Tensor3 top = core.d2tauQq;
    const Tensor3 mTerm = crossTerm(core.dM, QpQ);
    const Tensor3 jTerm = crossTerm(dJcT, LamQ);
    top += mTerm;
    top += tensorRot23(mTerm);
    top -= jTerm;
    top -= tensorRot23(jTerm);

    // d2(Jc w)/dq2 plus the sensitivity cross terms.
    Tensor3 bottom(nc, n, n);
    for (int ePage = 0; ePage < n; ++ePage) {
      const MatX contracted = contractCols(core.d2Jc[ePage], w);  // nc x n (pages g)
      for (int g = 0; g < n; ++g) bottom.page(g).col(ePage) = contracted.col(g);
    }
    const Tensor3 cTerm = crossTerm(core.dJc, QpQ);
    bottom += cTerm;
    bottom += tensorRot23(cTerm);
    out.qq = matrixTensorProduct(-Kinv, stackRows(top, bottom));
  }

  // (qd_minus, qd_minus): the map is linear in qd_minus.
  out.qdqd = Tensor3::Zero(n + nc, n, n);

  // (qd_minus, q): columns = qd_minus, pages = q.
  {
    Tensor3 top(n, n, n);
    Tensor3 bottom(nc, n, n);
    for (int g = 0; g < n; ++g) {
      top.page(g) = core.dM.page(g) * QpQd - dJcT.page(g) * LamQd - core.dM.page(g);
      bottom.page(g) = core.dJc.page(g) * QpQd - e * core.dJc.page(g);
    }
    out.qdq = matrixTensorProduct(-Kinv, stackRows(top, bottom));
  }
  out.qqd = tensorRot23(out.qdq);
  return out;
}

}  // namespace rbd
