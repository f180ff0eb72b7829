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

#ifndef RBD_DETAIL_DERIV_CORE_HPP_
#define RBD_DETAIL_DERIV_CORE_HPP_

#include <vector>

#include "rbd/model.hpp"
#include "rbd/spatial.hpp"
#include "rbd/tensor.hpp"

namespace rbd {
namespace detail {

struct DerivCoreOptions {
  bool secondOrder = false;
  bool withGravity = true;
};

// Chain-rule differentiation of the ground-frame dynamics sweeps.
//
// Everything is expressed in the ground-fixed frame, where the joint
// subspace columns, body inertias, and contact points all become explicit
// functions of q and differentiate in closed form:
//   d s_d / d q_e = s_e x s_d                     (for dof e preceding d)
//   d I_i / d q_e = (s_e x*) I_i - I_i (s_e x)    (for e on the chain to i)
// Higher derivatives follow by the product rule. From those, the sweep
// assembles the first/second partials of the constrained inverse dynamics
// (with the contact force held constant), the mass matrix derivative, the
// contact Jacobian with its derivatives, and the contact-point acceleration
// rows with their derivatives. One evaluation serves both the contact
// (KKT) and the impact derivative front ends.
//
// Tensor pages index the second (last-named) differentiation variable.
struct DerivCore {
  int n = 0;
  int nb = 0;
  int nc = 0;

  // Constrained inverse dynamics residual r = ID(q, qd, qdd) - Jc^T lambda.
  VecX tau;            // n
  MatX dtauDq;         // n x n
  MatX dtauDqd;        // n x n
  Tensor3 d2tauQq;     // n x n x n
  Tensor3 d2tauQdQd;   // n x n x n
  Tensor3 d2tauQdQ;    // n x n x n, columns = qd, pages = q

  MatX M;              // n x n mass matrix
  Tensor3 dM;          // n x n x n

  MatX Jc;                   // nc x n
  Tensor3 dJc;               // nc x n x n
  std::vector<Tensor3> d2Jc;  // per page f: d2Jc[f](k, d, e)

  // Contact-point acceleration rows c(q, qd, qdd) = Jc qdd + Jdot qd
  // (kinematic; gravity does not enter these rows).
  VecX acc;            // nc
  MatX dAccDq;         // nc x n (at fixed qd, qdd)
  MatX dAccDqd;        // nc x n
  Tensor3 d2accQq;     // nc x n x n
  Tensor3 d2accQdQd;   // nc x n x n
  Tensor3 d2accQdQ;    // nc x n x n, columns = qd, pages = q

  // Per-body cumulative external-force derivative d f^C_ext / d q_e,
  // exposed for the dedicated first-order accessor.
  std::vector<Vec6> dFextCum;  // nb * n

  void compute(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
               const VecX& qd, const VecX& qdd, const VecX& lambda,
               const DerivCoreOptions& options);
};

}  // namespace detail
}  // namespace rbd

#endif  // RBD_DETAIL_DERIV_CORE_HPP_
