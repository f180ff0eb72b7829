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

#ifndef RBD_KINEMATICS_HPP_
#define RBD_KINEMATICS_HPP_

#include <vector>

#include "rbd/model.hpp"
#include "rbd/spatial.hpp"

namespace rbd {

// Ground-frame kinematics of the whole tree. All spatial vectors are
// expressed in the ground-fixed frame; spatial linear components refer to
// the body-fixed point currently coincident with the ground origin.
struct KinematicsResult {
  std::vector<PluckerTransform> bodyToGround;  // per body
  std::vector<Vec6> velocity;                  // per body spatial velocity
  MatX groundSubspace;                         // 6 x nv, one column per dof
  std::vector<Vec6> biasAcceleration;          // per body, qdd = 0, no gravity
};

KinematicsResult forwardKinematics(const KinematicTree& tree, const VecX& q, const VecX& qd);

Vec3 contactPointPosition(const KinematicTree& tree, const VecX& q, const ContactPoint& contact);

// n_c x n contact Jacobian: rows are the selected Cartesian components
// (x, z for dim=2; x, y, z for dim=3) of each contact point velocity.
MatX contactJacobian(const KinematicTree& tree, const VecX& q, const ContactSet& contacts);

// The velocity-product contact acceleration Jdot * qd.
VecX jdotQdot(const KinematicTree& tree, const VecX& q, const VecX& qd, const ContactSet& contacts);

// Internal helpers reused by the dynamics and derivative modules.
Vec3 pointVelocity(const Vec6& bodyVel, const Vec3& point);
Vec3 pointAcceleration(const Vec6& bodyVel, const Vec6& bodyAcc, const Vec3& point);

}  // namespace rbd

#endif  // RBD_KINEMATICS_HPP_
