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

#include "rbd/dynamics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <sstream>

namespace rbd {

namespace {

// Embeds a per-contact multiplier block into a 3-D ground-frame force.
// Planar contacts carry (x, z) components.
Vec3 liftContactForce(const ContactPoint& contact, const VecX& lambda, int offset) {
  Vec3 f = Vec3::Zero();
  if (contact.dim == 2) {
    f.x() = lambda(offset);
    f.z() = lambda(offset + 1);
  } else {
    f = lambda.segment<3>(offset);
  }
  return f;
}

std::vector<Mat6> groundInertias(const KinematicTree& tree, const KinematicsResult& kin) {
  std::vector<Mat6> out(tree.bodies.size());
  for (int i = 0; i < tree.numBodies(); ++i) {
    out[i] = transformInertia(kin.bodyToGround[i], tree.bodies[i].inertia);
  }
  return out;
}

}  // namespace

VecX rnea(const KinematicTree& tree, const VecX& q, const VecX& qd, const VecX& qdd,
          const std::vector<ForceVector>* externalForces) {
  const int nb = tree.numBodies();
  const int n = tree.nv();
  if (qdd.size() != n) throw std::invalid_argument("rnea: qdd dimension mismatch");
  const KinematicsResult kin = forwardKinematics(tree, q, qd);
  const std::vector<Mat6> inertia = groundInertias(tree, kin);

  // Gravity enters as a fictitious base acceleration, common to all bodies
  // since everything is expressed in the ground frame.
  Vec6 a0 = Vec6::Zero();
  a0.tail<3>() = -tree.gravity;

  std::vector<Vec6> accel(nb);
  std::vector<Vec6> netForce(nb);
  for (int i = 0; i < nb; ++i) {
    const Body& body = tree.bodies[i];
    Vec6 a = body.parent >= 0 ? accel[body.parent] : a0;
    const int off = tree.dofOffset(i);
    for (int c = 0; c < body.joint.dof(); ++c) {
      a += kin.groundSubspace.col(off + c) * qdd(off + c);
    }
    // biasAcceleration already contains the parent's velocity-product terms.
    a += kin.biasAcceleration[i] -
         (body.parent >= 0 ? kin.biasAcceleration[body.parent] : Vec6::Zero());
    accel[i] = a;

    const Vec6 v = kin.velocity[i];
    Vec6 f = inertia[i] * a + crossForce(v, Vec6(inertia[i] * v));
    if (externalForces != nullptr) {
      f -= (*externalForces)[i].vector();
    }
    netForce[i] = f;
  }

  // Accumulate child wrenches into parents, then project on the subspaces.
  for (int i = nb - 1; i > 0; --i) {
    netForce[tree.bodies[i].parent] += netForce[i];
  }
  VecX tau(n);
  for (int d = 0; d < n; ++d) {
    tau(d) = kin.groundSubspace.col(d).dot(netForce[tree.dofBody(d)]);
  }
  return tau;
}

MatX massMatrix(const KinematicTree& tree, const VecX& q) {
  const int nb = tree.numBodies();
  const int n = tree.nv();
  const KinematicsResult kin = forwardKinematics(tree, q, VecX::Zero(n));

  // Composite rigid-body inertias in the ground frame.
  std::vector<Mat6> composite = groundInertias(tree, kin);
  for (int i = nb - 1; i > 0; --i) {
    composite[tree.bodies[i].parent] += composite[i];
  }

  MatX M = MatX::Zero(n, n);
  for (int d = 0; d < n; ++d) {
    const Vec6 f = composite[tree.dofBody(d)] * kin.groundSubspace.col(d);
    for (int a = 0; a <= d; ++a) {
      if (!tree.dofPrecedesOrEqual(a, d)) continue;
      M(d, a) = kin.groundSubspace.col(a).dot(f);
      M(a, d) = M(d, a);
    }
  }
  return M;
}

VecX biasForces(const KinematicTree& tree, const VecX& q, const VecX& qd) {
  return rnea(tree, q, qd, VecX::Zero(tree.nv()));
}

VecX forwardDynamics(const KinematicTree& tree, const VecX& q, const VecX& qd, const VecX& tau) {
  const MatX M = massMatrix(tree, q);
  const VecX b = biasForces(tree, q, qd);
  return M.ldlt().solve(VecX(tree.actuationSelector * tau - b));
}

MatX kktMatrix(const KinematicTree& tree, const ContactSet& contacts, const VecX& q) {
  const int n = tree.nv();
  const int nc = totalConstraintDim(contacts);
  const MatX Jc = contactJacobian(tree, q, contacts);
  MatX K = MatX::Zero(n + nc, n + nc);
  K.topLeftCorner(n, n) = massMatrix(tree, q);
  K.bottomLeftCorner(nc, n) = Jc;
  K.topRightCorner(n, nc) = Jc.transpose();
  return K;
}

namespace {

// Factors the saddle-point system, reporting which contact makes the
// Jacobian rank deficient when the factorization breaks down.
Eigen::FullPivLU<MatX> factorKkt(const KinematicTree& tree, const ContactSet& contacts,
                                 const VecX& q, const MatX& K) {
  Eigen::FullPivLU<MatX> lu(K);
  lu.setThreshold(1e-12);
  if (lu.isInvertible()) return lu;

  const MatX fullJ = contactJacobian(tree, q, contacts);
  int offset = 0;
  for (size_t c = 0; c < contacts.size(); ++c) {
    MatX reduced(fullJ.rows() - contacts[c].dim, fullJ.cols());
    reduced.topRows(offset) = fullJ.topRows(offset);
    reduced.bottomRows(reduced.rows() - offset) =
        fullJ.bottomRows(fullJ.rows() - offset - contacts[c].dim);
    Eigen::FullPivLU<MatX> probe(reduced);
    probe.setThreshold(1e-10);
    if (probe.rank() == reduced.rows()) {
      std::ostringstream msg;
      msg << "contact KKT system is singular; constraint at body '"
          << tree.bodies[contacts[c].body].name << "' is redundant or unrealizable";
      throw SingularContactError(msg.str());
    }
    offset += contacts[c].dim;
  }
  throw SingularContactError("contact KKT system is singular");
}

}  // namespace

KktSolution kktForwardDynamics(const KinematicTree& tree, const ContactSet& contacts,
                               const VecX& q, const VecX& qd, const VecX& tau) {
  const int n = tree.nv();
  const int nc = totalConstraintDim(contacts);
  if (nc == 0) {
    KktSolution out;
    out.qdd = forwardDynamics(tree, q, qd, tau);
    out.lambda.resize(0);
    return out;
  }
  const MatX K = kktMatrix(tree, contacts, q);
  const VecX b = biasForces(tree, q, qd);

  VecX rhs(n + nc);
  rhs.head(n) = tree.actuationSelector * tau - b;
  rhs.tail(nc) = -jdotQdot(tree, q, qd, contacts);
  const Eigen::FullPivLU<MatX> lu = factorKkt(tree, contacts, q, K);
  const VecX sol = lu.solve(rhs);
  KktSolution out;
  out.qdd = sol.head(n);
  out.lambda = -sol.tail(nc);
  return out;
}

std::vector<ForceVector> contactExternalForces(const KinematicTree& tree,
                                               const ContactSet& contacts, const VecX& q,
                                               const VecX& lambda) {
  const KinematicsResult kin = forwardKinematics(tree, q, VecX::Zero(tree.nv()));
  std::vector<ForceVector> fext(tree.bodies.size(), ForceVector{Vec3::Zero(), Vec3::Zero()});
  int row = 0;
  for (const ContactPoint& contact : contacts) {
    const Vec3 f = liftContactForce(contact, lambda, row);
    const Vec3 p = kin.bodyToGround[contact.body].applyPoint(contact.point);
    ForceVector& acc = fext[contact.body];
    acc.moment += p.cross(f);
    acc.force += f;
    row += contact.dim;
  }
  return fext;
}

VecX constrainedId(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                   const VecX& qd, const VecX& qdd, const VecX& lambda) {
  const std::vector<ForceVector> fext = contactExternalForces(tree, contacts, q, lambda);
  return rnea(tree, q, qd, qdd, &fext);
}

ImpactSolution impactDynamics(const KinematicTree& tree, const ContactSet& contacts,
                              const VecX& q, const VecX& qdMinus, double e) {
  const int n = tree.nv();
  const int nc = totalConstraintDim(contacts);
  const MatX K = kktMatrix(tree, contacts, q);
  const MatX M = K.topLeftCorner(n, n);
  const MatX Jc = K.bottomLeftCorner(nc, n);

  VecX rhs(n + nc);
  rhs.head(n) = M * qdMinus;
  rhs.tail(nc) = e * (Jc * qdMinus);
  const Eigen::FullPivLU<MatX> lu = factorKkt(tree, contacts, q, K);
  const VecX sol = lu.solve(rhs);
  ImpactSolution out;
  out.qdPlus = sol.head(n);
  out.lambdaHat = -sol.tail(nc);
  return out;
}

}  // namespace rbd
