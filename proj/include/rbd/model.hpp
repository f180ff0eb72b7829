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

#ifndef RBD_MODEL_HPP_
#define RBD_MODEL_HPP_

#include <string>
#include <vector>

#include "rbd/spatial.hpp"

namespace rbd {

enum class JointKind {
  kRevolute,
  kPrismatic,
  kPlanar,  // translation x, translation z, rotation y (3 DoF)
};

struct Joint {
  JointKind kind = JointKind::kRevolute;
  Vec3 axis = Vec3::UnitZ();            // revolute/prismatic only
  PluckerTransform parentToJoint;       // fixed placement in the parent frame

  int dof() const { return kind == JointKind::kPlanar ? 3 : 1; }

  // Joint-frame motion subspace columns (may depend on the joint coordinates).
  MotionSubspace subspace(const VecX& q) const;

  // Joint-frame transform: child coordinates -> joint frame.
  PluckerTransform jointTransform(const VecX& q) const;
};

struct Body {
  std::string name;
  int parent = -1;  // -1 = world
  Joint joint;
  SpatialInertia inertia;
};

struct ContactPoint {
  int body = 0;
  Vec3 point = Vec3::Zero();  // expressed in the body frame
  int dim = 2;                // 2: planar (x, z), 3: spatial (x, y, z)
};

using ContactSet = std::vector<ContactPoint>;

class KinematicTree {
 public:
  std::vector<Body> bodies;
  Vec3 gravity = Vec3(0, 0, -9.81);
  MatX actuationSelector;     // n x n_actuated, 0/1 columns
  ContactSet defaultContacts;  // contact directives from the model file

  int numBodies() const { return static_cast<int>(bodies.size()); }
  int nv() const { return nv_; }
  int numActuated() const { return static_cast<int>(actuationSelector.cols()); }

  int dofOffset(int body) const { return dofOffset_[body]; }
  int dofBody(int dof) const { return dofBody_[dof]; }
  // Column index of a dof within its joint.
  int dofColumn(int dof) const { return dof - dofOffset_[dofBody_[dof]]; }

  bool isBodyAncestorOrSelf(int i, int j) const;  // i on the chain root -> j
  // Partial order on dofs: ancestor joint first, intra-joint column order.
  bool dofPrecedesOrEqual(int a, int b) const;

  int bodyIndex(const std::string& name) const;  // -1 if absent

  void finalize();  // builds dof tables, validates invariants

 private:
  int nv_ = 0;
  std::vector<int> dofOffset_;
  std::vector<int> dofBody_;
};

// Parse the line-oriented model description format. Throws
// std::runtime_error with a line number on malformed input.
KinematicTree loadModel(const std::string& text);
KinematicTree loadModelFile(const std::string& path);

struct JointState {
  VecX q, qd, qdd, tau;
};

int totalConstraintDim(const ContactSet& contacts);

}  // namespace rbd

#endif  // RBD_MODEL_HPP_
