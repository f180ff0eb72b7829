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

#include <random>

#include "doctest.h"
#include "rbd/kinematics.hpp"
#include "test_models.hpp"

using namespace rbd;

namespace {

// Contact point position along the trajectory q(t) = q + t * qd.
Vec3 pointAt(const KinematicTree& tree, const ContactPoint& c, const VecX& q, const VecX& qd,
             double t) {
  return contactPointPosition(tree, VecX(q + t * qd), c);
}

}  // namespace

TEST_CASE("pendulum forward kinematics by hand") {
  const KinematicTree tree = loadModel(rbdtest::pendulumText());
  VecX q(1), qd(1);
  q << 0.6;
  qd << 1.3;
  const auto kin = forwardKinematics(tree, q, qd);
  // Tip of the pendulum (0, 0, -1) rotated about y by q.
  const Vec3 tip = kin.bodyToGround[0].applyPoint(Vec3(0, 0, -1));
  CHECK(tip.x() == doctest::Approx(-std::sin(q(0))));
  CHECK(tip.z() == doctest::Approx(-std::cos(q(0))));
  // Spatial velocity: pure rotation about y through the origin.
  CHECK((kin.velocity[0].head<3>() - Vec3(0, qd(0), 0)).norm() == doctest::Approx(0.0));
  CHECK(kin.velocity[0].tail<3>().norm() == doctest::Approx(0.0));
  // Tip speed is |qd| at unit radius.
  CHECK(pointVelocity(kin.velocity[0], tip).norm() == doctest::Approx(std::abs(qd(0))));
}

TEST_CASE("body velocities match time differentiation of the transforms") {
  const KinematicTree tree = rbdtest::randomTree(42, 5);
  std::mt19937 rng(99);
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.8);
  const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const double h = 1e-6;
  const auto kin = forwardKinematics(tree, q, qd);
  const auto kinP = forwardKinematics(tree, VecX(q + h * qd), VecX(qd));
  const auto kinM = forwardKinematics(tree, VecX(q - h * qd), VecX(qd));
  for (int i = 0; i < tree.numBodies(); ++i) {
    // Angular velocity from Rdot R^T.
    const Mat3 Rdot = (kinP.bodyToGround[i].rotation - kinM.bodyToGround[i].rotation) / (2 * h);
    const Mat3 wx = Rdot * kin.bodyToGround[i].rotation.transpose();
    const Vec3 w(wx(2, 1), wx(0, 2), wx(1, 0));
    CHECK((w - Vec3(kin.velocity[i].head<3>())).norm() < 1e-6);
    // Linear part: velocity of the body-fixed point at the ground origin.
    const Vec3 local = kin.bodyToGround[i].inverse().applyPoint(Vec3::Zero());
    const Vec3 vlin = (kinP.bodyToGround[i].applyPoint(local) -
                       kinM.bodyToGround[i].applyPoint(local)) /
                      (2 * h);
    CHECK((vlin - Vec3(kin.velocity[i].tail<3>())).norm() < 1e-6);
  }
}

TEST_CASE("velocity equals the ground subspace times joint rates") {
  const KinematicTree tree = rbdtest::randomTree(7, 6);
  std::mt19937 rng(100);
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.8);
  const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const auto kin = forwardKinematics(tree, q, qd);
  for (int i = 0; i < tree.numBodies(); ++i) {
    Vec6 v = Vec6::Zero();
    for (int d = 0; d < tree.nv(); ++d) {
      if (tree.isBodyAncestorOrSelf(tree.dofBody(d), i)) v += kin.groundSubspace.col(d) * qd(d);
    }
    CHECK((v - kin.velocity[i]).norm() < 1e-12);
  }
}

TEST_CASE("contact jacobian matches finite differences of the position") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = tree.defaultContacts;
  std::mt19937 rng(5);
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.7);
  const MatX jac = contactJacobian(tree, q, contacts);
  const double h = 1e-6;
  for (int d = 0; d < tree.nv(); ++d) {
    VecX qp = q, qm = q;
    qp(d) += h;
    qm(d) -= h;
    const Vec3 dp = (contactPointPosition(tree, qp, contacts[0]) -
                     contactPointPosition(tree, qm, contacts[0])) /
                    (2 * h);
    CHECK(jac(0, d) == doctest::Approx(dp.x()).epsilon(1e-6));
    CHECK(jac(1, d) == doctest::Approx(dp.z()).epsilon(1e-6));
  }
}

TEST_CASE("jdot qd matches the second time derivative at constant rates") {
  const KinematicTree tree = rbdtest::randomTree(21, 4);
  ContactSet contacts;
  contacts.push_back({tree.numBodies() - 1, Vec3(0.1, 0.0, -0.2), 3});
  std::mt19937 rng(6);
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.6);
  const VecX qd = rbdtest::randomVec(rng, tree.nv(), 0.9);
  // With qdd = 0 the contact point acceleration is exactly Jdot * qd.
  const double h = 1e-4;
  const Vec3 acc = (pointAt(tree, contacts[0], q, qd, h) -
                    2 * pointAt(tree, contacts[0], q, qd, 0.0) +
                    pointAt(tree, contacts[0], q, qd, -h)) /
                   (h * h);
  const VecX gamma = jdotQdot(tree, q, qd, contacts);
  CHECK((acc - Vec3(gamma)).norm() < 1e-5);
}
