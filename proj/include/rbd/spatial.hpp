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

#ifndef RBD_SPATIAL_HPP_
#define RBD_SPATIAL_HPP_

#include <Eigen/Dense>

namespace rbd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Spatial vectors are stored angular block first, linear block second.

struct MotionVector {
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();

  MotionVector() = default;
  MotionVector(const Vec3& ang, const Vec3& lin) : angular(ang), linear(lin) {}
  explicit MotionVector(const Vec6& v) : angular(v.head<3>()), linear(v.tail<3>()) {}

  Vec6 vector() const {
    Vec6 v;
    v << angular, linear;
    return v;
  }
};

struct ForceVector {
  Vec3 moment = Vec3::Zero();
  Vec3 force = Vec3::Zero();

  ForceVector() = default;
  ForceVector(const Vec3& m, const Vec3& f) : moment(m), force(f) {}
  explicit ForceVector(const Vec6& v) : moment(v.head<3>()), force(v.tail<3>()) {}

  Vec6 vector() const {
    Vec6 v;
    v << moment, force;
    return v;
  }
};

Mat3 skew(const Vec3& v);

// Spatial motion cross product v x m.
Vec6 crossMotion(const Vec6& v, const Vec6& m);
MotionVector crossMotion(const MotionVector& v, const MotionVector& m);

// Dual cross product v x* f, satisfying m^T (v x* f) = -(v x m)^T f.
Vec6 crossForce(const Vec6& v, const Vec6& f);
ForceVector crossForce(const MotionVector& v, const ForceVector& f);

// 6x6 operator forms: crossMotionOperator(v) * m == v x m,
// crossForceOperator(v) * f == v x* f.
Mat6 crossMotionOperator(const Vec6& v);
Mat6 crossForceOperator(const Vec6& v);

// Barred force-cross operator B(f) with B(f) * m == m x* f.
//
// The sign convention is the one validated against the numerical oracle:
// with this definition the contact term S_i^T (f x'* S_j) in the
// first-order inverse-dynamics derivative equals (dS_i/dq_j)^T f.
Mat6 forceCrossOperator(const Vec6& f);
Mat6 forceCrossOperator(const ForceVector& f);

// Rigid-body frame change (rotation + translation), mapping vectors
// expressed in a local frame into the parent/ground frame.
struct PluckerTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  PluckerTransform() = default;
  PluckerTransform(const Mat3& R, const Vec3& t) : rotation(R), translation(t) {}

  // Composition: (this * other) applies `other` first, then `this`.
  PluckerTransform operator*(const PluckerTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  PluckerTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }

  Vec3 applyPoint(const Vec3& p) const { return rotation * p + translation; }

  // Motion-vector change of coordinates (local -> this frame).
  Vec6 applyMotion(const Vec6& m) const;
  // Force-vector change of coordinates (local -> this frame).
  Vec6 applyForce(const Vec6& f) const;

  Mat6 motionMatrix() const;
  Mat6 forceMatrix() const;
};

// Spatial inertia of one body, expressed about the body frame origin.
struct SpatialInertia {
  double mass = 0.0;
  Vec3 firstMoment = Vec3::Zero();     // m * com
  Mat3 rotationalInertia = Mat3::Zero();  // about the body frame origin

  // Dense 6x6 form [[I, hx], [hx^T, m 1]], angular rows first.
  Mat6 matrix() const;

  // Construct from COM-referenced quantities.
  static SpatialInertia fromComProperties(double mass, const Vec3& com, const Mat3& inertiaAtCom);
};

// Inertia expressed in the ground frame given the body-to-ground transform.
Mat6 transformInertia(const PluckerTransform& X, const SpatialInertia& I);

// Joint-subspace-motion matrix: one 6-D column per joint DoF.
struct MotionSubspace {
  Eigen::Matrix<double, 6, Eigen::Dynamic> columns;

  int dof() const { return static_cast<int>(columns.cols()); }
};

}  // namespace rbd

#endif  // RBD_SPATIAL_HPP_
