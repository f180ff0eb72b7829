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

#ifndef RBD_DERIV_SECOND_ORDER_HPP_
#define RBD_DERIV_SECOND_ORDER_HPP_

#include "rbd/deriv_first_order.hpp"
#include "rbd/model.hpp"
#include "rbd/tensor.hpp"

namespace rbd {

// Second-order tensors of the constrained inverse dynamics (lambda held
// constant). Pages index the second differentiation variable.
struct IdSoBlocks {
  Tensor3 d2tauQq;    // n x n x n
  Tensor3 d2tauQdQd;  // n x n x n
  Tensor3 d2tauQdQ;   // n x n x n, columns = qd, pages = q
};

IdSoBlocks idSoDerivatives(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                           const VecX& qd, const VecX& qdd, const VecX& lambda);

// Second-order tensors of the KKT forward dynamics, rows stacked as
// [qdd; -lambda]. The (qd,tau) and (tau,tau) blocks are identically zero
// and stored as zero tensors; the (q,qd) block is the 2-3 rotation of the
// (qd,q) block by Hessian symmetry.
struct KktSoBlocks {
  Tensor3 qq;      // (n+nc) x n x n
  Tensor3 qdqd;    // (n+nc) x n x n
  Tensor3 qdq;     // (n+nc) x n x n, columns = qd, pages = q
  Tensor3 qqd;     // rot23 of qdq
  Tensor3 tauq;    // (n+nc) x n_act x n
  Tensor3 qdtau;   // zero
  Tensor3 tautau;  // zero
};

KktSoBlocks kktFdSo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                    const VecX& qd, const VecX& tau, const KktFoBlocks& fo);

// SO chain-rule tensors of the contact acceleration pieces.
struct ContactPathSo {
  Tensor3 d2ConstraintQq;  // d2(Jc qdd + Jdot qd)/dq2
  Tensor3 d2JdotQdQdQd;    // d2(Jdot qd)/dqd2
  Tensor3 d2JdotQdQdQ;     // d2(Jdot qd)/dqd dq (columns = qd, pages = q)
};

ContactPathSo contactPathSo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                            const VecX& qd, const VecX& qdd);

// Second-order tensors of the impact dynamics, rows stacked [qd_plus;
// -lambda_hat]; differentiation variables are q and qd_minus.
struct ImpactSoBlocks {
  Tensor3 qq;      // (n+nc) x n x n
  Tensor3 qdqd;    // zero (the impact map is linear in qd_minus)
  Tensor3 qdq;     // columns = qd_minus, pages = q
  Tensor3 qqd;     // rot23 of qdq
};

ImpactSoBlocks impactSo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                        const VecX& qdMinus, double e, const ImpactFoBlocks& fo);

}  // namespace rbd

#endif  // RBD_DERIV_SECOND_ORDER_HPP_
