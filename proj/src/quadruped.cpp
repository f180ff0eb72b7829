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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rbd/deriv_second_order.hpp"
#include "rbd/detail/deriv_core.hpp"
#include "rbd/kinematics.hpp"
#include "rbd/quadruped.hpp"

namespace rbd {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Tuning parseTuning(const std::string& text) {
  Tuning out;
  std::istringstream stream(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(stream, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("tuning line " + std::to_string(lineNo) + ": missing '='");
    }
    const std::string key = trim(line.substr(0, eq));
    std::istringstream values(line.substr(eq + 1));
    std::vector<double> vals;
    double v;
    while (values >> v) vals.push_back(v);
    if (key.empty() || vals.empty()) {
      throw std::runtime_error("tuning line " + std::to_string(lineNo) + ": malformed entry");
    }
    out[key] = vals;
  }
  return out;
}

Tuning loadTuningFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tuning file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseTuning(buf.str());
}

double tuningScalar(const Tuning& t, const std::string& key, double fallback) {
  const auto it = t.find(key);
  return it == t.end() ? fallback : it->second.front();
}

std::vector<double> tuningVector(const Tuning& t, const std::string& key,
                                 const std::vector<double>& fallback) {
  const auto it = t.find(key);
  return it == t.end() ? fallback : it->second;
}

namespace {

using mddp::BoundaryConstraint;
using mddp::PathConstraint;
using mddp::Phase;
using mddp::TreeDynamics;

MatX diagFrom(const std::vector<double>& v) {
  VecX d = VecX::Map(v.data(), static_cast<int>(v.size()));
  return d.asDiagonal();
}

// Touchdown boundary between a flight phase and the following stance
// phase: configuration continuity, post-impact velocity matching, zero
// foot height, and reference angles for the trailing leg.
BoundaryConstraint impactBoundary(std::shared_ptr<KinematicTree> tree, ContactSet contacts,
                                  double q3Ref, double q4Ref) {
  const int n = tree->nv();
  BoundaryConstraint bc;
  bc.dim = 2 * n + 3;
  bc.value = [tree, contacts, q3Ref, q4Ref, n](const VecX& xe, const VecX& sn) {
    const VecX q = xe.head(n);
    const VecX qdm = xe.tail(n);
    const ImpactSolution imp = impactDynamics(*tree, contacts, q, qdm, 0.0);
    VecX psi(2 * n + 3);
    psi.head(n) = sn.head(n) - q;
    psi.segment(n, n) = sn.tail(n) - imp.qdPlus;
    psi(2 * n) = contactPointPosition(*tree, q, contacts[0]).z();
    psi(2 * n + 1) = q(5) - q3Ref;
    psi(2 * n + 2) = q(6) - q4Ref;
    return psi;
  };
  bc.jacobian = [tree, contacts, n](const VecX& xe, const VecX&, MatX& jx, MatX& js) {
    const VecX q = xe.head(n);
    const VecX qdm = xe.tail(n);
    const ImpactFoBlocks fo = impactFo(*tree, contacts, q, qdm, 0.0);
    jx = MatX::Zero(2 * n + 3, 2 * n);
    jx.topLeftCorner(n, n) = -MatX::Identity(n, n);
    jx.block(n, 0, n, n) = -fo.daDq.topRows(n);
    jx.block(n, n, n, n) = -fo.daDqdMinus.topRows(n);
    const MatX jc = contactJacobian(*tree, q, contacts);
    jx.block(2 * n, 0, 1, n) = jc.row(1);  // z row of the (x, z) pair
    jx(2 * n + 1, 5) = 1.0;
    jx(2 * n + 2, 6) = 1.0;
    js = MatX::Zero(2 * n + 3, 2 * n);
    js.topLeftCorner(n, n).setIdentity();
    js.block(n, n, n, n).setIdentity();
  };
  bc.hessianXx = [tree, contacts, n](const VecX& xe, const VecX&) {
    const VecX q = xe.head(n);
    const VecX qdm = xe.tail(n);
    const ImpactFoBlocks fo = impactFo(*tree, contacts, q, qdm, 0.0);
    const ImpactSoBlocks so = impactSo(*tree, contacts, q, qdm, 0.0, fo);
    Tensor3 h = Tensor3::Zero(2 * n + 3, 2 * n, 2 * n);
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
          h(n + r, j, k) = -0.5 * (so.qq(r, j, k) + so.qq(r, k, j));
          const double cross = -so.qdq(r, j, k);
          h(n + r, n + j, k) = cross;
          h(n + r, k, n + j) = cross;
        }
      }
    }
    detail::DerivCore core;
    detail::DerivCoreOptions opts;
    opts.secondOrder = false;
    core.compute(*tree, contacts, q, VecX::Zero(n), VecX::Zero(n),
                 VecX::Zero(totalConstraintDim(contacts)), opts);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) h(2 * n, j, k) = core.dJc(1, j, k);
    }
    return h;
  };
  return bc;
}

// Final-phase terminal constraints on trunk height and pitch.
BoundaryConstraint finalBoundary(int n, double zRef, double thetaRef) {
  BoundaryConstraint bc;
  bc.dim = 2;
  bc.value = [n, zRef, thetaRef](const VecX& xe, const VecX&) {
    VecX psi(2);
    psi << xe(1) - zRef, xe(2) - thetaRef;
    return psi;
  };
  bc.jacobian = [n](const VecX&, const VecX&, MatX& jx, MatX& js) {
    jx = MatX::Zero(2, 2 * n);
    jx(0, 1) = 1.0;
    jx(1, 2) = 1.0;
    js = MatX::Zero(2, 0);
  };
  return bc;
}

PathConstraint stancePath(int nu, double torqueLimit, double mu) {
  PathConstraint p;
  p.cu = MatX::Zero(11, nu);
  p.cu.topRows(nu).setIdentity();
  p.cu.middleRows(nu, nu) = -MatX::Identity(nu, nu);
  p.clam = MatX::Zero(11, 2);
  // |lambda_x| <= mu lambda_z and lambda_z >= 0.
  p.clam(8, 0) = 1.0;
  p.clam(8, 1) = -mu;
  p.clam(9, 0) = -1.0;
  p.clam(9, 1) = -mu;
  p.clam(10, 1) = -1.0;
  p.c0 = VecX::Zero(11);
  p.c0.head(2 * nu).setConstant(-torqueLimit);
  return p;
}

PathConstraint flightPath(int nu, double torqueLimit) {
  PathConstraint p;
  p.cu = MatX::Zero(2 * nu, nu);
  p.cu.topRows(nu).setIdentity();
  p.cu.bottomRows(nu) = -MatX::Identity(nu, nu);
  p.c0 = VecX::Constant(2 * nu, -torqueLimit);
  return p;
}

}  // namespace

QuadrupedSetup buildQuadrupedProblem(const std::string& modelPath, const Tuning& tuning) {
  QuadrupedSetup setup;
  setup.tree = std::make_shared<KinematicTree>(loadModelFile(modelPath));
  KinematicTree& tree = *setup.tree;
  const int n = tree.nv();
  const int nx = 2 * n;
  const int nu = tree.numActuated();
  if (n != 7 || nu != 4 || tree.defaultContacts.size() != 2) {
    throw std::runtime_error("quadruped model must have 7 dofs, 4 actuators, 2 contacts");
  }
  ContactSet frontContact{tree.defaultContacts[0]};
  ContactSet backContact{tree.defaultContacts[1]};
  if (tree.bodies[frontContact[0].body].name.find("front") == std::string::npos) {
    std::swap(frontContact, backContact);
  }

  const double hip = tuningScalar(tuning, "hip_angle", 0.4);
  const double knee = tuningScalar(tuning, "knee_angle", -0.8);
  VecX qStand = VecX::Zero(n);
  qStand(3) = hip;
  qStand(4) = knee;
  qStand(5) = hip;
  qStand(6) = knee;
  const double footZ =
      std::min(contactPointPosition(tree, qStand, frontContact[0]).z(),
               contactPointPosition(tree, qStand, backContact[0]).z());
  qStand(1) = -footZ;
  setup.standingPose = qStand;
  setup.forwardSpeed = tuningScalar(tuning, "forward_speed", 0.5);

  const double stanceDur = tuningScalar(tuning, "stance_duration", 0.08);
  const double flightDur = tuningScalar(tuning, "flight_duration", 0.12);
  const int segments = static_cast<int>(tuningScalar(tuning, "segments_per_phase", 10));
  const int steps = static_cast<int>(tuningScalar(tuning, "steps_per_segment", 4));
  const int legs = static_cast<int>(tuningScalar(tuning, "legs_per_phase", 1));
  const double mu = tuningScalar(tuning, "mu", 0.7);
  const double torqueLimit = tuningScalar(tuning, "torque_limit", 50.0);
  const double sWeight = tuningScalar(tuning, "contact_force_weight", 1.0);

  const std::vector<double> qWeights = tuningVector(
      tuning, "q_weights",
      {1.0, 40.0, 40.0, 4.0, 4.0, 4.0, 4.0, 2.0, 0.5, 0.5, 0.2, 0.2, 0.2, 0.2});
  const std::vector<double> qfWeights = tuningVector(
      tuning, "qf_flight_weights",
      {0.0, 20.0, 20.0, 2.0, 2.0, 2.0, 2.0, 2.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5});
  const MatX q = diagFrom(qWeights);
  const MatX qf = diagFrom(qfWeights);

  const std::vector<double> durations = {stanceDur, flightDur, stanceDur, flightDur, stanceDur};
  setup.phaseNames = {"back-stance", "flight-1", "front-stance", "flight-2", "back-stance"};
  const std::vector<const ContactSet*> phaseContacts = {&backContact, nullptr, &frontContact,
                                                        nullptr, &backContact};
  const MatX backStanceR = diagFrom({5.0, 0.5, 0.1, 0.1});
  const MatX frontStanceR = diagFrom({0.1, 0.1, 5.0, 0.5});
  const MatX flightR = MatX::Identity(nu, nu);

  double elapsed = 0.0;
  for (int p = 0; p < 5; ++p) {
    Phase ph;
    const bool stance = phaseContacts[p] != nullptr;
    ph.dynamics = std::make_shared<TreeDynamics>(tree, stance ? *phaseContacts[p] : ContactSet{});
    setup.phaseContactBody.push_back(stance ? (*phaseContacts[p])[0].body : -1);
    ph.duration = durations[p];
    ph.segments = segments;
    ph.stepsPerSegment = steps;
    ph.legs = legs;

    VecX xref = VecX::Zero(nx);
    xref.head(n) = qStand;
    xref(0) = setup.forwardSpeed * (elapsed + 0.5 * durations[p]);
    xref(n) = setup.forwardSpeed;
    ph.cost.Q = q;
    ph.cost.xref = xref;
    ph.cost.R = (p == 0 || p == 4) ? backStanceR : (p == 2 ? frontStanceR : flightR);
    if (stance) {
      ph.cost.S = sWeight * MatX::Identity(2, 2);
      ph.path = stancePath(nu, torqueLimit, mu);
    } else {
      ph.path = flightPath(nu, torqueLimit);
      VecX xrefEnd = xref;
      xrefEnd(0) = setup.forwardSpeed * (elapsed + durations[p]);
      ph.cost.Qf = qf;
      ph.cost.xrefF = xrefEnd;
    }

    if (p == 4) {
      ph.boundary = finalBoundary(n, qStand(1), 0.0);
    } else if (stance) {
      ph.boundary = mddp::linkageConstraint(MatX::Identity(nx, nx));
    } else {
      const ContactSet& touchdown = *phaseContacts[p + 1];
      ph.boundary = impactBoundary(setup.tree, touchdown, qStand(5), qStand(6));
    }
    setup.problem.phases.push_back(std::move(ph));
    elapsed += durations[p];
  }

  VecX x0 = VecX::Zero(nx);
  x0.head(n) = qStand;
  x0(n) = setup.forwardSpeed;
  setup.problem.initialState = x0;

  setup.solver.qnPeriod = 1;
  setup.solver.constraintTolerance = tuningScalar(tuning, "constraint_tolerance", 1e-3);
  setup.solver.costTolerance = tuningScalar(tuning, "cost_tolerance", 1e-7);
  setup.solver.maxIterations = static_cast<int>(tuningScalar(tuning, "max_iterations", 10000));
  setup.solver.maxInnerIterations =
      static_cast<int>(tuningScalar(tuning, "max_inner_iterations", 400));
  setup.solver.penaltyInit = tuningScalar(tuning, "penalty_init", 10.0);
  setup.solver.penaltyGrowth = tuningScalar(tuning, "penalty_growth", 10.0);
  setup.solver.penaltyMax = tuningScalar(tuning, "penalty_max", 1e8);
  setup.solver.violationShrinkTarget =
      tuningScalar(tuning, "violation_shrink_target", 0.25);
  setup.solver.trKick = tuningScalar(tuning, "tr_kick", 1e-6);
  setup.solver.progressEvery = static_cast<int>(tuningScalar(tuning, "progress_every", 0));
  return setup;
}

}  // namespace rbd
