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
#include "rbd/spatial.hpp"

using namespace rbd;

namespace {

std::mt19937 rng(12345);

Vec6 randomVec6() {
  std::uniform_real_distribution<double> real(-2.0, 2.0);
  Vec6 v;
  for (int i = 0; i < 6; ++i) v(i) = real(rng);
  return v;
}

Vec3 randomVec3() {
  std::uniform_real_distribution<double> real(-2.0, 2.0);
  return Vec3(real(rng), real(rng), real(rng));
}

PluckerTransform randomTransform() {
  const Vec3 axis = randomVec3().normalized();
  std::uniform_real_distribution<double> real(-2.0, 2.0);
  return PluckerTransform(Eigen::AngleAxisd(real(rng), axis).toRotationMatrix(), randomVec3());
}

}  // namespace

TEST_CASE("skew matrix reproduces the cross product") {
  const Vec3 a = randomVec3();
  const Vec3 b = randomVec3();
  CHECK(((skew(a) * b) - a.cross(b)).norm() == doctest::Approx(0.0));
  CHECK((skew(a) + skew(a).transpose()).norm() == doctest::Approx(0.0));
}

TEST_CASE("cross product operator forms agree with the direct functions") {
  const Vec6 v = randomVec6();
  const Vec6 m = randomVec6();
  const Vec6 f = randomVec6();
  CHECK((crossMotionOperator(v) * m - crossMotion(v, m)).norm() == doctest::Approx(0.0));
  CHECK((crossForceOperator(v) * f - crossForce(v, f)).norm() == doctest::Approx(0.0));
}

TEST_CASE("dual cross product satisfies the pairing identity") {
  // m . (v x* f) = -(v x m) . f, the defining property of x*.
  for (int trial = 0; trial < 10; ++trial) {
    const Vec6 v = randomVec6();
    const Vec6 m = randomVec6();
    const Vec6 f = randomVec6();
    CHECK(m.dot(crossForce(v, f)) == doctest::Approx(-crossMotion(v, m).dot(f)));
  }
}

TEST_CASE("barred force-cross operator swaps the x* arguments") {
  for (int trial = 0; trial < 10; ++trial) {
    const Vec6 f = randomVec6();
    const Vec6 m = randomVec6();
    CHECK((forceCrossOperator(f) * m - crossForce(m, f)).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("motion and force transforms are dual") {
  const PluckerTransform X = randomTransform();
  const Mat6 Xm = X.motionMatrix();
  const Mat6 Xf = X.forceMatrix();
  // Power invariance: (Xf f) . (Xm m) == f . m.
  const Vec6 m = randomVec6();
  const Vec6 f = randomVec6();
  CHECK((Xf * f).dot(Xm * m) == doctest::Approx(f.dot(m)));
  CHECK((X.applyMotion(m) - Xm * m).norm() == doctest::Approx(0.0));
  CHECK((X.applyForce(f) - Xf * f).norm() == doctest::Approx(0.0));
}

TEST_CASE("transform composition and inverse") {
  const PluckerTransform A = randomTransform();
  const PluckerTransform B = randomTransform();
  const Vec3 p = randomVec3();
  CHECK(((A * B).applyPoint(p) - A.applyPoint(B.applyPoint(p))).norm() == doctest::Approx(0.0));
  CHECK((A.inverse().applyPoint(A.applyPoint(p)) - p).norm() == doctest::Approx(0.0));
  const Vec6 m = randomVec6();
  CHECK(((A * B).applyMotion(m) - A.applyMotion(B.applyMotion(m))).norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("cross products are equivariant under frame changes") {
  const PluckerTransform X = randomTransform();
  const Vec6 v = randomVec6();
  const Vec6 m = randomVec6();
  const Vec6 f = randomVec6();
  CHECK((X.applyMotion(crossMotion(v, m)) - crossMotion(X.applyMotion(v), X.applyMotion(m)))
            .norm() == doctest::Approx(0.0));
  CHECK((X.applyForce(crossForce(v, f)) - crossForce(X.applyMotion(v), X.applyForce(f))).norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("spatial inertia from COM properties") {
  const double mass = 2.5;
  const Vec3 com(0.1, -0.2, 0.3);
  Mat3 inertiaAtCom;
  inertiaAtCom << 0.04, 0.001, -0.002, 0.001, 0.05, 0.003, -0.002, 0.003, 0.06;
  const SpatialInertia I = SpatialInertia::fromComProperties(mass, com, inertiaAtCom);
  CHECK(I.mass == doctest::Approx(mass));
  CHECK((I.firstMoment - mass * com).norm() == doctest::Approx(0.0));

  // Kinetic energy of a pure translation must be m |v|^2 / 2 regardless of
  // the reference point.
  Vec6 v = Vec6::Zero();
  v.tail<3>() = Vec3(0.3, -0.4, 0.5);
  CHECK(0.5 * v.dot(I.matrix() * v) == doctest::Approx(0.5 * mass * v.tail<3>().squaredNorm()));

  // Rotation about an axis through the COM: energy is w^T I_C w / 2 plus the
  // translation induced at the reference point.
  Vec6 w = Vec6::Zero();
  w.head<3>() = Vec3(0.2, 0.1, -0.3);
  w.tail<3>() = w.head<3>().cross(-com);  // reference point moving, COM fixed
  const double expected = 0.5 * w.head<3>().dot(inertiaAtCom * w.head<3>());
  CHECK(0.5 * w.dot(I.matrix() * w) == doctest::Approx(expected));
}

TEST_CASE("inertia frame change preserves kinetic energy") {
  const double mass = 1.7;
  const Vec3 com(0.05, 0.1, -0.15);
  Mat3 inertiaAtCom = Mat3::Identity() * 0.03;
  inertiaAtCom(0, 1) = inertiaAtCom(1, 0) = 0.004;
  const SpatialInertia I = SpatialInertia::fromComProperties(mass, com, inertiaAtCom);
  const PluckerTransform X = randomTransform();
  const Mat6 Iw = transformInertia(X, I);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec6 vLocal = randomVec6();
    const Vec6 vWorld = X.applyMotion(vLocal);
    CHECK(vWorld.dot(Iw * vWorld) == doctest::Approx(vLocal.dot(I.matrix() * vLocal)));
  }
  CHECK((Iw - Iw.transpose()).norm() == doctest::Approx(0.0));
}
