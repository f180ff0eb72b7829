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

#ifndef RBD_DYNAMICS_HPP_
#define RBD_DYNAMICS_HPP_

#include <optional>
#include <vector>

#include "rbd/kinematics.hpp"
#include "rbd/model.hpp"

namespace rbd {

struct KktSolution {
  VecX qdd;     // n
  VecX lambda;  // n_c
};

struct ImpactSolution {
  VecX qdPlus;     // n
  VecX lambdaHat;  // n_c (impulse)
};

// Raised when the contact KKT matrix is (numerically) singular.
struct SingularContactError : std::runtime_error {
  explicit SingularContactError(const std::string& what) : std::runtime_error(what) {}
};

// Inverse dynamics (RNEA, ground frame). Returns the full generalized
// force vector; the actuation selector is applied at the OCP boundary.
VecX rnea(const KinematicTree& tree, const VecX& q, const VecX& qd, const VecX& qdd,
          const std::vector<ForceVector>* externalForces = nullptr);

MatX massMatrix(const KinematicTree& tree, const VecX& q);

// Coriolis/centrifugal plus gravity: b(q, qd) = rnea(q, qd, 0).
VecX biasForces(const KinematicTree& tree, const VecX& q, const VecX& qd);

// Unconstrained forward dynamics; tau is the actuated torque vector.
VecX forwardDynamics(const KinematicTree& tree, const VecX& q, const VecX& qd, const VecX& tau);

// Contact-constrained forward dynamics from the KKT saddle-point system.
KktSolution kktForwardDynamics(const KinematicTree& tree, const ContactSet& contacts,
                               const VecX& q, const VecX& qd, const VecX& tau);

// Constrained inverse dynamics: S tau = M qdd + b - Jc^T lambda, with the
// contact wrench assembled as per-body external spatial forces.
VecX constrainedId(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                   const VecX& qd, const VecX& qdd, const VecX& lambda);

// Impulsive impact dynamics; e is the coefficient of restitution.
ImpactSolution impactDynamics(const KinematicTree& tree, const ContactSet& contacts,
                              const VecX& q, const VecX& qdMinus, double e);

// Per-body external spatial forces equivalent to the contact wrench
// Jc^T * lambda (moment about the ground origin, force), ground frame.
std::vector<ForceVector> contactExternalForces(const KinematicTree& tree,
                                               const ContactSet& contacts, const VecX& q,
                                               const VecX& lambda);

// Assembled KKT matrix [[M, Jc^T], [Jc, 0]] (mostly for tests).
MatX kktMatrix(const KinematicTree& tree, const ContactSet& contacts, const VecX& q);

}  // namespace rbd

#endif  // RBD_DYNAMICS_HPP_
