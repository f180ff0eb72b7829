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
#include "rbd/deriv_second_order.hpp"
#include "rbd/diff_oracle.hpp"
#include "rbd/kinematics.hpp"
#include "test_models.hpp"

using namespace rbd;

namespace {

VecX stackedKkt(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                const VecX& qd, const VecX& tau) {
  const KktSolution sol = kktForwardDynamics(tree, contacts, q, qd, tau);
  VecX out(sol.qdd.size() + sol.lambda.size());
  out << sol.qdd, -sol.lambda;
  return out;
}

VecX stackedImpact(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                   const VecX& qdm, double e) {
  const ImpactSolution sol = impactDynamics(tree, contacts, q, qdm, e);
  VecX out(sol.qdPlus.size() + sol.lambdaHat.size());
  out << sol.qdPlus, -sol.lambdaHat;
  return out;
}

}  // namespace

TEST_CASE("constrained inverse dynamics SO tensors match the oracle") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = tree.defaultContacts;
  std::mt19937 rng(21);
  const OracleConfig cfg;
  for (int trial = 0; trial < 3; ++trial) {
    const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.8);
    const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
    const VecX qdd = rbdtest::randomVec(rng, tree.nv(), 1.0);
    const VecX lambda = rbdtest::randomVec(rng, 2, 30.0);
    const IdSoBlocks so = idSoDerivatives(tree, contacts, q, qd, qdd, lambda);

    const Tensor3 oqq = oracleHessianTensor(
        VectorFunction(
            [&](const VecX& v) { return constrainedId(tree, contacts, v, qd, qdd, lambda); }),
        q, cfg);
    const Tensor3 oqdqd = oracleHessianTensor(
        VectorFunction(
            [&](const VecX& v) { return constrainedId(tree, contacts, q, v, qdd, lambda); }),
        qd, cfg);
    const Tensor3 oqdq = oracleHessianTensor(
        VectorFunction2([&](const VecX& u, const VecX& w) {
          return constrainedId(tree, contacts, w, u, qdd, lambda);
        }),
        qd, q, cfg);
    CHECK(relativeError(so.d2tauQq, oqq) < cfg.soTolerance);
    CHECK(relativeError(so.d2tauQdQd, oqdqd) < cfg.soTolerance);
    CHECK(relativeError(so.d2tauQdQ, oqdq) < cfg.soTolerance);
  }
}

TEST_CASE("ID SO tensors on random trees") {
  std::mt19937 rng(22);
  const OracleConfig cfg;
  for (unsigned seed : {31u, 32u}) {
    const KinematicTree tree = rbdtest::randomTree(seed, 4);
    ContactSet contacts;
    contacts.push_back({tree.numBodies() - 1, Vec3(0.1, 0.0, -0.1), 2});
    const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.7);
    const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
    const VecX qdd = rbdtest::randomVec(rng, tree.nv(), 1.0);
    const VecX lambda = rbdtest::randomVec(rng, 2, 10.0);
    const IdSoBlocks so = idSoDerivatives(tree, contacts, q, qd, qdd, lambda);
    const Tensor3 oqq = oracleHessianTensor(
        VectorFunction(
            [&](const VecX& v) { return constrainedId(tree, contacts, v, qd, qdd, lambda); }),
        q, cfg);
    CHECK(relativeError(so.d2tauQq, oqq) < cfg.soTolerance);
  }
}

TEST_CASE("KKT forward dynamics SO tensors match the oracle") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = tree.defaultContacts;
  std::mt19937 rng(23);
  const OracleConfig cfg;
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.7);
  const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const VecX tau = rbdtest::randomVec(rng, tree.numActuated(), 10.0);
  const KktFoBlocks fo = kktFdFo(tree, contacts, q, qd, tau);
  const KktSoBlocks so = kktFdSo(tree, contacts, q, qd, tau, fo);

  const Tensor3 oqq = oracleHessianTensor(
      VectorFunction([&](const VecX& v) { return stackedKkt(tree, contacts, v, qd, tau); }), q,
      cfg);
  const Tensor3 oqdqd = oracleHessianTensor(
      VectorFunction([&](const VecX& v) { return stackedKkt(tree, contacts, q, v, tau); }), qd,
      cfg);
  const Tensor3 oqdq = oracleHessianTensor(
      VectorFunction2(
          [&](const VecX& u, const VecX& w) { return stackedKkt(tree, contacts, w, u, tau); }),
      qd, q, cfg);
  const Tensor3 otauq = oracleHessianTensor(
      VectorFunction2(
          [&](const VecX& u, const VecX& w) { return stackedKkt(tree, contacts, w, qd, u); }),
      tau, q, cfg);
  CHECK(relativeError(so.qq, oqq) < cfg.soTolerance);
  CHECK(relativeError(so.qdqd, oqdqd) < cfg.soTolerance);
  CHECK(relativeError(so.qdq, oqdq) < cfg.soTolerance);
  CHECK(relativeError(so.tauq, otauq) < cfg.soTolerance);

  // Hessian symmetry within each same-variable block.
  Tensor3 sym = so.qq;
  sym -= tensorRot23(so.qq);
  CHECK(sym.maxAbs() < 1e-9 * std::max(1.0, so.qq.maxAbs()));
  Tensor3 symd = so.qdqd;
  symd -= tensorRot23(so.qdqd);
  CHECK(symd.maxAbs() < 1e-9 * std::max(1.0, so.qdqd.maxAbs()));

  // The cross block pair is an exact 2-3 rotation, and the tau blocks are
  // exactly zero.
  Tensor3 cross = so.qqd;
  cross -= tensorRot23(so.qdq);
  CHECK(cross.maxAbs() == 0.0);
  CHECK(so.qdtau.maxAbs() == 0.0);
  CHECK(so.tautau.maxAbs() == 0.0);
}

TEST_CASE("FO/SO consistency along a configuration direction") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = tree.defaultContacts;
  std::mt19937 rng(24);
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.6);
  const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const VecX tau = rbdtest::randomVec(rng, tree.numActuated(), 8.0);
  const VecX dir = rbdtest::randomVec(rng, tree.nv(), 1.0);

  const KktFoBlocks fo = kktFdFo(tree, contacts, q, qd, tau);
  const KktSoBlocks so = kktFdSo(tree, contacts, q, qd, tau, fo);
  const double h = 1e-5;
  const KktFoBlocks foP = kktFdFo(tree, contacts, VecX(q + h * dir), qd, tau);
  const KktFoBlocks foM = kktFdFo(tree, contacts, VecX(q - h * dir), qd, tau);
  const MatX directional = (foP.daDq - foM.daDq) / (2 * h);
  const MatX contracted = contractPages(so.qq, dir);
  CHECK(relativeError(contracted, directional) < 1e-5);
}

TEST_CASE("unconstrained reduction of the SO blocks") {
  const KinematicTree tree = loadModel(rbdtest::doublePendulumText());
  std::mt19937 rng(25);
  const OracleConfig cfg;
  const VecX q = rbdtest::randomVec(rng, 2, 1.0);
  const VecX qd = rbdtest::randomVec(rng, 2, 1.0);
  const VecX tau = rbdtest::randomVec(rng, 2, 3.0);
  const KktFoBlocks fo = kktFdFo(tree, {}, q, qd, tau);
  const KktSoBlocks so = kktFdSo(tree, {}, q, qd, tau, fo);
  const Tensor3 oqq = oracleHessianTensor(
      VectorFunction([&](const VecX& v) { return forwardDynamics(tree, v, qd, tau); }), q, cfg);
  CHECK(relativeError(so.qq, oqq) < cfg.soTolerance);
}

TEST_CASE("contact path SO tensors match the oracle") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = tree.defaultContacts;
  std::mt19937 rng(26);
  const OracleConfig cfg;
  const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.7);
  const VecX qd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const VecX qdd = rbdtest::randomVec(rng, tree.nv(), 1.0);
  const ContactPathSo so = contactPathSo(tree, contacts, q, qd, qdd);

  auto constraint = [&](const VecX& v) {
    return VecX(contactJacobian(tree, v, contacts) * qdd + jdotQdot(tree, v, qd, contacts));
  };
  const Tensor3 oqq = oracleHessianTensor(VectorFunction(constraint), q, cfg);
  CHECK(relativeError(so.d2ConstraintQq, oqq) < cfg.soTolerance);

  const Tensor3 oqdqd = oracleHessianTensor(
      VectorFunction([&](const VecX& v) { return jdotQdot(tree, q, v, contacts); }), qd, cfg);
  CHECK(relativeError(so.d2JdotQdQdQd, oqdqd) < cfg.soTolerance);

  const Tensor3 oqdq = oracleHessianTensor(
      VectorFunction2(
          [&](const VecX& u, const VecX& w) { return jdotQdot(tree, w, u, contacts); }),
      qd, q, cfg);
  CHECK(relativeError(so.d2JdotQdQdQ, oqdq) < cfg.soTolerance);

  // Jdot qd is quadratic in qd, so its qd-Hessian cannot depend on qd.
  const ContactPathSo other = contactPathSo(tree, contacts, q, VecX(3 * qd), qdd);
  Tensor3 diff = other.d2JdotQdQdQd;
  diff -= so.d2JdotQdQdQd;
  CHECK(diff.maxAbs() < 1e-12);
}

TEST_CASE("impact SO tensors match the oracle") {
  const KinematicTree tree = loadModel(rbdtest::planarHopperText());
  const ContactSet contacts = tree.defaultContacts;
  std::mt19937 rng(27);
  const OracleConfig cfg;
  for (double e : {0.0, 0.3}) {
    const VecX q = rbdtest::randomVec(rng, tree.nv(), 0.6);
    const VecX qdm = rbdtest::randomVec(rng, tree.nv(), 1.2);
    const ImpactFoBlocks fo = impactFo(tree, contacts, q, qdm, e);
    const ImpactSoBlocks so = impactSo(tree, contacts, q, qdm, e, fo);

    const Tensor3 oqq = oracleHessianTensor(
        VectorFunction([&](const VecX& v) { return stackedImpact(tree, contacts, v, qdm, e); }),
        q, cfg);
    const Tensor3 oqdq = oracleHessianTensor(
        VectorFunction2(
            [&](const VecX& u, const VecX& w) { return stackedImpact(tree, contacts, w, u, e); }),
        qdm, q, cfg);
    CHECK(relativeError(so.qq, oqq) < cfg.soTolerance);
    CHECK(relativeError(so.qdq, oqdq) < cfg.soTolerance);
    CHECK(so.qdqd.maxAbs() == 0.0);
    Tensor3 cross = so.qqd;
    cross -= tensorRot23(so.qdq);
    CHECK(cross.maxAbs() == 0.0);
  }
}
