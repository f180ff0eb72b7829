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

#include "rbd/spatial.hpp"

namespace rbd {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Vec6 crossMotion(const Vec6& v, const Vec6& m) {
  Vec6 out;
  out.head<3>() = v.head<3>().cross(m.head<3>());
  out.tail<3>() = v.tail<3>().cross(m.head<3>()) + v.head<3>().cross(m.tail<3>());
  return out;
}

MotionVector crossMotion(const MotionVector& v, const MotionVector& m) {
  return MotionVector(crossMotion(v.vector(), m.vector()));
}

Vec6 crossForce(const Vec6& v, const Vec6& f) {
  Vec6 out;
  out.head<3>() = v.head<3>().cross(f.head<3>()) + v.tail<3>().cross(f.tail<3>());
  out.tail<3>() = v.head<3>().cross(f.tail<3>());
  return out;
}

ForceVector crossForce(const MotionVector& v, const ForceVector& f) {
  return ForceVector(crossForce(v.vector(), f.vector()));
}

Mat6 crossMotionOperator(const Vec6& v) {
  Mat6 m = Mat6::Zero();
  const Mat3 wx = skew(v.head<3>());
  m.topLeftCorner<3, 3>() = wx;
  m.bottomLeftCorner<3, 3>() = skew(v.tail<3>());
  m.bottomRightCorner<3, 3>() = wx;
  return m;
}

Mat6 crossForceOperator(const Vec6& v) {
  // v x* = -(v x)^T
  return -crossMotionOperator(v).transpose();
}

Mat6 forceCrossOperator(const Vec6& f) {
  // B(f) m = m x* f. Columns are basis-motion duals of f.
  Mat6 b = Mat6::Zero();
  const Mat3 nx = skew(f.head<3>());
  const Mat3 fx = skew(f.tail<3>());
  // m x* f = [w x n + l x fl ; w x fl] for m = [w; l], f = [n; fl].
  // Column block structure: d/dw = [-nx ... ], assemble by blocks.
  b.topLeftCorner<3, 3>() = -nx;
  b.topRightCorner<3, 3>() = -fx;
  b.bottomLeftCorner<3, 3>() = -fx;
  return b;
}

Mat6 forceCrossOperator(const ForceVector& f) { return forceCrossOperator(f.vector()); }

Vec6 PluckerTransform::applyMotion(const Vec6& m) const {
  Vec6 out;
  out.head<3>() = rotation * m.head<3>();
  out.tail<3>() = rotation * m.tail<3>() + translation.cross(out.head<3>());
  return out;
}

Vec6 PluckerTransform::applyForce(const Vec6& f) const {
  Vec6 out;
  out.tail<3>() = rotation * f.tail<3>();
  out.head<3>() = rotation * f.head<3>() + translation.cross(out.tail<3>());
  return out;
}

Mat6 PluckerTransform::motionMatrix() const {
  Mat6 x = Mat6::Zero();
  x.topLeftCorner<3, 3>() = rotation;
  x.bottomLeftCorner<3, 3>() = skew(translation) * rotation;
  x.bottomRightCorner<3, 3>() = rotation;
  return x;
}

Mat6 PluckerTransform::forceMatrix() const {
  Mat6 x = Mat6::Zero();
  x.topLeftCorner<3, 3>() = rotation;
  x.topRightCorner<3, 3>() = skew(translation) * rotation;
  x.bottomRightCorner<3, 3>() = rotation;
  return x;
}

Mat6 SpatialInertia::matrix() const {
  Mat6 m = Mat6::Zero();
  const Mat3 hx = skew(firstMoment);
  m.topLeftCorner<3, 3>() = rotationalInertia;
  m.topRightCorner<3, 3>() = hx;
  m.bottomLeftCorner<3, 3>() = hx.transpose();
  m.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  return m;
}

SpatialInertia SpatialInertia::fromComProperties(double mass, const Vec3& com,
                                                 const Mat3& inertiaAtCom) {
  SpatialInertia out;
  out.mass = mass;
  out.firstMoment = mass * com;
  const Mat3 cx = skew(com);
  out.rotationalInertia = inertiaAtCom - mass * cx * cx;
  return out;
}

Mat6 transformInertia(const PluckerTransform& X, const SpatialInertia& I) {
  const Mat6 xf = X.forceMatrix();
  const Mat6 xmInv = X.inverse().motionMatrix();
  return xf * I.matrix() * xmInv;
}

}  // namespace rbd
