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

#ifndef RBD_MDDP_PROBLEM_HPP_
#define RBD_MDDP_PROBLEM_HPP_

#include <functional>
#include <memory>
#include <vector>

#include "rbd/dynamics.hpp"
#include "rbd/model.hpp"
#include "rbd/tensor.hpp"

namespace rbd::mddp {

// One continuous-time dynamics evaluation at (x, u). Derivatives are taken
// with respect to the stacked variable z = [x; u] of size N = nx + nu; the
// flow Jacobian/Hessian cover only the nx rows of xdot (the control rows of
// the augmented system are identically zero). Contact forces, when present,
// are exposed as an observable with their own derivatives so that costs and
// path constraints can depend on them.
struct FlowEval {
  VecX xdot;         // nx
  VecX lambda;       // nc (empty when contactDim() == 0)
  MatX fz;           // nx x N, order >= 1
  MatX lambdaZ;      // nc x N, order >= 1
  Tensor3 fzz;       // nx x N x N, order >= 2
  Tensor3 lambdaZz;  // nc x N x N, order >= 2
};

class PhaseDynamics {
 public:
  virtual ~PhaseDynamics() = default;
  virtual int stateDim() const = 0;
  virtual int controlDim() const = 0;
  virtual int contactDim() const { return 0; }
  // order: 0 = values, 1 = + first derivatives, 2 = + second derivatives.
  virtual void eval(const VecX& x, const VecX& u, int order, FlowEval& out) const = 0;
};

// Rigid-body dynamics over a kinematic tree: x = [q; qd], u = actuated
// torques. An empty contact set yields unconstrained forward dynamics,
// otherwise the contact-constrained dynamics with force observables.
class TreeDynamics : public PhaseDynamics {
 public:
  TreeDynamics(const KinematicTree& tree, ContactSet contacts);

  int stateDim() const override { return 2 * tree_.nv(); }
  int controlDim() const override { return tree_.numActuated(); }
  int contactDim() const override;
  void eval(const VecX& x, const VecX& u, int order, FlowEval& out) const override;

  const KinematicTree& tree() const { return tree_; }
  const ContactSet& contacts() const { return contacts_; }

 private:
  const KinematicTree& tree_;
  ContactSet contacts_;
};

// Quadratic knot cost (x - xref)' Q (x - xref) + u' R u + lambda' S lambda,
// integrated as a rectangle rule over the segment duration, plus an
// optional terminal cost (x - xrefF)' Qf (x - xrefF) at the phase end.
struct PhaseCost {
  MatX Q;      // nx x nx
  VecX xref;   // nx
  MatX R;      // nu x nu
  MatX S;      // nc x nc (size 0 when no contacts)
  MatX Qf;     // nx x nx (size 0 when no terminal cost)
  VecX xrefF;  // nx
};

// Per-knot inequality constraints g = cx x + cu u + clam lambda + c0 <= 0.
// Any of the coefficient blocks may have zero rows/cols when unused.
struct PathConstraint {
  MatX cx;    // m x nx
  MatX cu;    // m x nu
  MatX clam;  // m x nc
  VecX c0;    // m
  int dim() const { return static_cast<int>(c0.size()); }
};

// Equality constraint psi(x_end, s_next) = 0 tying a leg's terminal state
// to the next leg's decision initial state (empty s for the final phase).
// The constraint may be nonlinear in x_end (curvature supplied by
// hessianXx, pages = x_end) but must be affine in s_next.
struct BoundaryConstraint {
  int dim = 0;
  std::function<VecX(const VecX& xe, const VecX& sn)> value;
  std::function<void(const VecX& xe, const VecX& sn, MatX& jx, MatX& js)> jacobian;
  std::function<Tensor3(const VecX& xe, const VecX& sn)> hessianXx;  // null = affine
};

// Full-state (or component-selected) continuity: psi = sel * (sn - xe).
BoundaryConstraint linkageConstraint(const MatX& sel);

struct Phase {
  std::shared_ptr<const PhaseDynamics> dynamics;
  double duration = 0.0;
  int segments = 1;
  int stepsPerSegment = 4;
  int legs = 1;
  PhaseCost cost;
  PathConstraint path;          // dim 0 when absent
  BoundaryConstraint boundary;  // dim 0 when unconstrained
};

struct Problem {
  VecX initialState;
  std::vector<Phase> phases;

  int nx() const { return phases.front().dynamics->stateDim(); }
  int nu() const { return phases.front().dynamics->controlDim(); }
};

// A leg is a contiguous run of segments within one phase whose initial
// state is a decision variable (except for the very first leg, pinned to
// the problem's initial state).
struct LegLayout {
  int phase = 0;
  int segments = 0;
  bool phaseEnd = false;  // the leg ends at the phase boundary
};

std::vector<LegLayout> legLayout(const Problem& problem);

// Boundary constraint in effect at the end of a leg: the owning phase's
// constraint at a phase boundary, full-state continuity between legs of
// the same phase, dim 0 when the leg ends the horizon unconstrained.
BoundaryConstraint legBoundary(const Problem& problem, const std::vector<LegLayout>& layout,
                               int leg);

}  // namespace rbd::mddp

#endif  // RBD_MDDP_PROBLEM_HPP_
