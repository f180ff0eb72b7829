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

#include "rbd/kinematics.hpp"

#include <stdexcept>

namespace rbd {

KinematicsResult forwardKinematics(const KinematicTree& tree, const VecX& q, const VecX& qd) {
  if (q.size() != tree.nv() || qd.size() != tree.nv()) {
    throw std::invalid_argument("forwardKinematics: state dimension mismatch");
  }
  const int nb = tree.numBodies();
  KinematicsResult out;
  out.bodyToGround.resize(nb);
  out.velocity.assign(nb, Vec6::Zero());
  out.biasAcceleration.assign(nb, Vec6::Zero());
  out.groundSubspace = MatX::Zero(6, tree.nv());

  for (int i = 0; i < nb; ++i) {
    const Body& body = tree.bodies[i];
    const int off = tree.dofOffset(i);
    const VecX qi = q.segment(off, body.joint.dof());
    const PluckerTransform parentX =
        body.parent >= 0 ? out.bodyToGround[body.parent] : PluckerTransform();
    const PluckerTransform jointFrame = parentX * body.joint.parentToJoint;
    out.bodyToGround[i] = jointFrame * body.joint.jointTransform(qi);

    const MotionSubspace sLocal = body.joint.subspace(qi);
    const Vec6 vParent = body.parent >= 0 ? out.velocity[body.parent] : Vec6::Zero();
    const Vec6 aParent = body.parent >= 0 ? out.biasAcceleration[body.parent] : Vec6::Zero();

    Vec6 v = vParent;
    Vec6 a = aParent;
    for (int d = 0; d < body.joint.dof(); ++d) {
      const Vec6 s = jointFrame.applyMotion(sLocal.columns.col(d));
      out.groundSubspace.col(off + d) = s;
      // In the ground frame the subspace column moves with the bodies it is
      // attached to: sdot = w x s with w the velocity accumulated so far.
      a += crossMotion(v, s) * qd(off + d);
      v += s * qd(off + d);
    }
    out.velocity[i] = v;
    out.biasAcceleration[i] = a;
  }
  return out;
}

Vec3 pointVelocity(const Vec6& bodyVel, const Vec3& point) {
  return bodyVel.tail<3>() + bodyVel.head<3>().cross(point);
}

Vec3 pointAcceleration(const Vec6& bodyVel, const Vec6& bodyAcc, const Vec3& point) {
  const Vec3 pdot = pointVelocity(bodyVel, point);
  return bodyAcc.tail<3>() + bodyAcc.head<3>().cross(point) + bodyVel.head<3>().cross(pdot);
}

Vec3 contactPointPosition(const KinematicTree& tree, const VecX& q, const ContactPoint& contact) {
  if (contact.body < 0 || contact.body >= tree.numBodies()) {
    throw std::invalid_argument("contactPointPosition: invalid body index");
  }
  const auto kin = forwardKinematics(tree, q, VecX::Zero(tree.nv()));
  return kin.bodyToGround[contact.body].applyPoint(contact.point);
}

namespace {

// Rows of a point's Cartesian map selected by the contact dimension.
void fillContactRows(const ContactPoint& contact, const Vec3& x, VecX& out, int rowStart) {
  if (contact.dim == 2) {
    out(rowStart) = x.x();
    out(rowStart + 1) = x.z();
  } else {
    out.segment<3>(rowStart) = x;
  }
}

}  // namespace

MatX contactJacobian(const KinematicTree& tree, const VecX& q, const ContactSet& contacts) {
  const auto kin = forwardKinematics(tree, q, VecX::Zero(tree.nv()));
  const int nc = totalConstraintDim(contacts);
  MatX jac = MatX::Zero(nc, tree.nv());
  int row = 0;
  for (const auto& contact : contacts) {
    if (contact.body < 0 || contact.body >= tree.numBodies()) {
      throw std::invalid_argument("contactJacobian: invalid body index");
    }
    const Vec3 p = kin.bodyToGround[contact.body].applyPoint(contact.point);
    for (int d = 0; d < tree.nv(); ++d) {
      if (!tree.isBodyAncestorOrSelf(tree.dofBody(d), contact.body)) continue;
      const Vec6 s = kin.groundSubspace.col(d);
      const Vec3 col = s.tail<3>() + s.head<3>().cross(p);
      if (contact.dim == 2) {
        jac(row, d) = col.x();
        jac(row + 1, d) = col.z();
      } else {
        jac.block<3, 1>(row, d) = col;
      }
    }
    row += contact.dim;
  }
  return jac;
}

VecX jdotQdot(const KinematicTree& tree, const VecX& q, const VecX& qd, const ContactSet& contacts) {
  const auto kin = forwardKinematics(tree, q, qd);
  const int nc = totalConstraintDim(contacts);
  VecX out = VecX::Zero(nc);
  int row = 0;
  for (const auto& contact : contacts) {
    const Vec3 p = kin.bodyToGround[contact.body].applyPoint(contact.point);
    const Vec3 acc =
        pointAcceleration(kin.velocity[contact.body], kin.biasAcceleration[contact.body], p);
    fillContactRows(contact, acc, out, row);
    row += contact.dim;
  }
  return out;
}

}  // namespace rbd
