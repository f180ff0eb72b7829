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
#include "rbd/deriv_first_order.hpp"
#include "rbd/diff_oracle.hpp"
#include "rbd/kinematics.hpp"
#include "test_models.hpp"

using namespace rbd;

namespace {

ContactSet contactsFor(const KinematicTree& tree) {
  if (!tree.defaultContacts.empty()) return tree.defaultContacts;
  ContactSet contacts;
  contacts.push_back({tree.numBodies() - 1, Vec3(0.05, 0.0, -0.15), 2});
  return contacts;
}

}  // namespace

TEST_CASE("constrained inverse dynamics FO blocks match the oracle") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = contactsFor(tree);
  std::mt19937 rng(101);
  const OracleConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.8);
    const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
    const VecX qdd = rbdtest::randomVec(rng, tree.nv(), 1.0);
    const VecX lambda = rbdtest::randomVec(rng, totalConstraintDim(contacts), 30.0);
    const IdFoBlocks fo = idFoDerivatives(tree, contacts, q, qd, qdd, lambda);
    const MatX oq = oracleJacobian(
        [&](const VecX& v) { return constrainedId(tree, contacts, v, qd, qdd, lambda); }, q, cfg);
    const MatX oqd = oracleJacobian(
        [&](const VecX& v) { return constrainedId(tree, contacts, q, v, qdd, lambda); }, qd, cfg);
    CHECK(relativeError(fo.dtauDq, oq) < cfg.foTolerance);
    CHECK(relativeError(fo.dtauDqd, oqd) < cfg.foTolerance);
  }
}

TEST_CASE("FO blocks on random trees") {
  std::mt19937 rng(202);
  const OracleConfig cfg;
  for (unsigned seed : {11u, 12u, 13u, 14u}) {
    const KinematicTree tree = rbdtest::randomTree(seed, 3 + static_cast<int>(seed) % 4);
    const ContactSet contacts = contactsFor(tree);
    const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.7);
    const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
    const VecX qdd = rbdtest::randomVec(rng, tree.nv(), 1.0);
    const VecX lambda = rbdtest::randomVec(rng, totalConstraintDim(contacts), 10.0);
    const IdFoBlocks fo = idFoDerivatives(tree, contacts, q, qd, qdd, lambda);
    const MatX oq = oracleJacobian(
        [&](const VecX& v) { return constrainedId(tree, contacts, v, qd, qdd, lambda); }, q, cfg);
    const MatX oqd = oracleJacobian(
        [&](const VecX& v) { return constrainedId(tree, contacts, q, v, qdd, lambda); }, qd, cfg);
    CHECK(relativeError(fo.dtauDq, oq) < cfg.foTolerance);
    CHECK(relativeError(fo.dtauDqd, oqd) < cfg.foTolerance);
  }
}

TEST_CASE("velocity derivative is independent of the contact force") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = contactsFor(tree);
  std::mt19937 rng(303);
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.8);
  const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const VecX qdd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const VecX l1 = rbdtest::randomVec(rng, 2, 40.0);
  const VecX l2 = rbdtest::randomVec(rng, 2, 40.0);
  const IdFoBlocks a = idFoDerivatives(tree, contacts, q, qd, qdd, l1);
  const IdFoBlocks b = idFoDerivatives(tree, contacts, q, qd, qdd, l2);
  CHECK((a.dtauDqd - b.dtauDqd).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("zero contact force reduces to the unconstrained derivative") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = contactsFor(tree);
  std::mt19937 rng(404);
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.8);
  const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const VecX qdd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const IdFoBlocks withContacts =
      idFoDerivatives(tree, contacts, q, qd, qdd, VecX::Zero(2));
  const IdFoBlocks without = idFoDerivatives(tree, {}, q, qd, qdd, VecX());
  CHECK((withContacts.dtauDq - without.dtauDq).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((withContacts.dtauDqd - without.dtauDqd).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("cumulative external force derivative matches the oracle") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = contactsFor(tree);
  std::mt19937 rng(505);
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.8);
  const VecX lambda = rbdtest::randomVec(rng, 2, 25.0);
  const Tensor3 fo = fextCumulativeFo(tree, contacts, q, lambda);

  // Oracle: subtree-accumulated external force per body, differenced in q.
  auto cumulative = [&](const VecX& v) {
    auto fext = contactExternalForces(tree, contacts, v, lambda);
    for (int i = tree.numBodies() - 1; i > 0; --i) {
      fext[tree.bodies[i].parent].moment += fext[i].moment;
      fext[tree.bodies[i].parent].force += fext[i].force;
    }
    VecX out(6 * tree.numBodies());
    for (int i = 0; i < tree.numBodies(); ++i) out.segment<6>(6 * i) = fext[i].vector();
    return out;
  };
  const MatX oracle = oracleJacobian(cumulative, q);
  for (int i = 0; i < tree.numBodies(); ++i) {
    CHECK(relativeError(MatX(fo.page(i)), MatX(oracle.middleRows(6 * i, 6))) < 1e-6);
  }
  // Zero force gives a zero tensor.
  const Tensor3 zero = fextCumulativeFo(tree, contacts, q, VecX::Zero(2));
  CHECK(zero.maxAbs() == 0.0);
}

TEST_CASE("KKT forward dynamics FO blocks match the oracle") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = contactsFor(tree);
  std::mt19937 rng(606);
  const OracleConfig cfg;
  auto stacked = [&](const VecX& q, const VecX& qd, const VecX& tau) {
    const KktSolution sol = kktForwardDynamics(tree, contacts, q, qd, tau);
    VecX out(sol.qdd.size() + sol.lambda.size());
    out << sol.qdd, -sol.lambda;
    return out;
  };
  for (int trial = 0; trial < 5; ++trial) {
    const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.7);
    const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
    const VecX tau = rbdtest::randomVec(rng, tree.numActuated(), 10.0);
    const KktFoBlocks fo = kktFdFo(tree, contacts, q, qd, tau);
    const MatX oq = oracleJacobian([&](const VecX& v) { return stacked(v, qd, tau); }, q, cfg);
    const MatX oqd = oracleJacobian([&](const VecX& v) { return stacked(q, v, tau); }, qd, cfg);
    const MatX otau = oracleJacobian([&](const VecX& v) { return stacked(q, qd, v); }, tau, cfg);
    CHECK(relativeError(fo.daDq, oq) < cfg.foTolerance);
    CHECK(relativeError(fo.daDqd, oqd) < cfg.foTolerance);
    CHECK(relativeError(fo.daDtau, otau) < cfg.foTolerance);
    // Differentiated constraint row: Jc dqdd/dqd + d(Jdot qd)/dqd = 0.
    const MatX Jc = contactJacobian(tree, q, contacts);
    const ContactPathFo path = contactPathFo(tree, contacts, q, qd, fo.qdd0);
    CHECK((Jc * fo.daDqd.topRows(tree.nv()) + path.dJdotQdDqd).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("unconstrained reduction of the KKT FO blocks") {
  const KinematicTree tree = loadModel(rbdtest::doublePendulumText());
  std::mt19937 rng(707);
  const VecX q = rbdtest::randomVec(rng, 2, 1.0);
  const VecX qd = rbdtest::randomVec(rng, 2, 1.0);
  const VecX tau = rbdtest::randomVec(rng, 2, 3.0);
  const KktFoBlocks fo = kktFdFo(tree, {}, q, qd, tau);
  // dFD/du = -M^{-1} dID/du with the acceleration from forward dynamics.
  const VecX qdd = forwardDynamics(tree, q, qd, tau);
  const IdFoBlocks id = idFoDerivatives(tree, {}, q, qd, qdd, VecX());
  const MatX M = massMatrix(tree, q);
  const MatX expectedQ = -M.ldlt().solve(id.dtauDq);
  const MatX expectedQd = -M.ldlt().solve(id.dtauDqd);
  CHECK((fo.daDq - expectedQ).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK((fo.daDqd - expectedQd).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("contact path FO pieces match the oracle") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = contactsFor(tree);
  std::mt19937 rng(808);
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.8);
  const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const VecX qdd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const ContactPathFo path = contactPathFo(tree, contacts, q, qd, qdd);

  auto constraint = [&](const VecX& v) {
    return VecX(contactJacobian(tree, v, contacts) * qdd + jdotQdot(tree, v, qd, contacts));
  };
  auto jdotTermQd = [&](const VecX& v) { return jdotQdot(tree, q, v, contacts); };
  auto jdotTermQ = [&](const VecX& v) { return jdotQdot(tree, v, qd, contacts); };
  CHECK(relativeError(path.dConstraintDq, oracleJacobian(constraint, q)) < 1e-6);
  CHECK(relativeError(path.dJdotQdDqd, oracleJacobian(jdotTermQd, qd)) < 1e-6);
  CHECK(relativeError(path.dJdotQdDq, oracleJacobian(jdotTermQ, q)) < 1e-6);
  // Bilinearity: doubling qd doubles d(Jdot qd)/dqd.
  const ContactPathFo twice = contactPathFo(tree, contacts, q, VecX(2 * qd), qdd);
  CHECK((twice.dJdotQdDqd - 2 * path.dJdotQdDqd).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("impact FO blocks match the oracle") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = contactsFor(tree);
  std::mt19937 rng(909);
  const OracleConfig cfg;
  for (double e : {0.0, 0.4}) {
    auto stacked = [&](const VecX& q, const VecX& qdm) {
      const ImpactSolution sol = impactDynamics(tree, contacts, q, qdm, e);
      VecX out(sol.qdPlus.size() + sol.lambdaHat.size());
      out << sol.qdPlus, -sol.lambdaHat;
      return out;
    };
    for (int trial = 0; trial < 4; ++trial) {
      const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.6);
      const VecX qdm = rbdtest::randomVec(rng, tree.nv(), 1.5);
      const ImpactFoBlocks fo = impactFo(tree, contacts, q, qdm, e);
      const MatX oq = oracleJacobian([&](const VecX& v) { return stacked(v, qdm); }, q, cfg);
      const MatX oqd = oracleJacobian([&](const VecX& v) { return stacked(q, v); }, qdm, cfg);
      CHECK(relativeError(fo.daDq, oq) < cfg.foTolerance);
      CHECK(relativeError(fo.daDqdMinus, oqd) < cfg.foTolerance);
    }
  }
}

TEST_CASE("impact FO with no contacts is the identity map") {
  const KinematicTree tree = loadModel(rbdtest::doublePendulumText());
  std::mt19937 rng(111);
  const VecX q = rbdtest::randomVec(rng, 2, 1.0);
  const VecX qdm = rbdtest::randomVec(rng, 2, 1.0);
  const ImpactFoBlocks fo = impactFo(tree, {}, q, qdm, 0.0);
  CHECK((fo.daDqdMinus - MatX::Identity(2, 2)).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(fo.daDq.lpNorm<Eigen::Infinity>() < 1e-12);
}
