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

#ifndef RBD_DERIV_FIRST_ORDER_HPP_
#define RBD_DERIV_FIRST_ORDER_HPP_

#include "rbd/dynamics.hpp"
#include "rbd/model.hpp"
#include "rbd/tensor.hpp"

namespace rbd {

// First-order partials of the constrained inverse dynamics
// Stau = M qdd + b - Jc^T lambda, with lambda held constant.
struct IdFoBlocks {
  MatX dtauDq;   // n x n
  MatX dtauDqd;  // n x n
};

IdFoBlocks idFoDerivatives(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                           const VecX& qd, const VecX& qdd, const VecX& lambda);

// Per-body derivative of the cumulative external spatial force:
// entry (:, j, i) = d f^C_ext(body i) / d q_j, a 6 x n x numBodies tensor.
Tensor3 fextCumulativeFo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                         const VecX& lambda);

// First-order partials of the KKT forward dynamics, rows stacked as
// [d qdd / d(.); -d lambda / d(.)], evaluated at the (qdd0, lambda0)
// produced by solving the contact dynamics at (q, qd, tau).
struct KktFoBlocks {
  MatX daDq;    // (n + nc) x n
  MatX daDqd;   // (n + nc) x n
  MatX daDtau;  // (n + nc) x n_actuated
  VecX qdd0;
  VecX lambda0;
};

KktFoBlocks kktFdFo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                    const VecX& qd, const VecX& tau);

// Chain-rule derivatives of the contact acceleration pieces.
struct ContactPathFo {
  MatX dConstraintDq;  // d(Jc qdd + Jdot qd)/dq
  MatX dJdotQdDqd;     // d(Jdot qd)/dqd
  MatX dJdotQdDq;      // d(Jdot qd)/dq
};

ContactPathFo contactPathFo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                            const VecX& qd, const VecX& qdd);

// First-order partials of the impact dynamics, rows stacked as
// [d qd_plus / d(.); -d lambda_hat / d(.)].
struct ImpactFoBlocks {
  MatX daDq;        // (n + nc) x n
  MatX daDqdMinus;  // (n + nc) x n
  VecX qdPlus0;
  VecX lambdaHat0;
};

ImpactFoBlocks impactFo(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                        const VecX& qdMinus, double e);

}  // namespace rbd

#endif  // RBD_DERIV_FIRST_ORDER_HPP_
