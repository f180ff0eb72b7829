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

#ifndef RBD_MDDP_SOLVER_HPP_
#define RBD_MDDP_SOLVER_HPP_

#include <string>
#include <vector>

#include "rbd/mddp/problem.hpp"

namespace rbd::mddp {

struct SolverConfig {
  // Full second-order STMs every qnPeriod-th accepted iteration; in
  // between, the SO STM is secant-updated from the FO STM history.
  // qnPeriod <= 0 means "only at the first iteration" (QN-infinity).
  int qnPeriod = 1;
  double trInitialShift = 0.0;
  double trKick = 1e-6;
  double trGrow = 2.0;
  double trShrink = 0.5;
  double trZeroThreshold = 1e-12;
  double penaltyInit = 10.0;
  double penaltyGrowth = 10.0;
  double penaltyMax = 1e8;
  // Penalty grows when the violation fails to shrink by this factor
  // between outer iterations.
  double violationShrinkTarget = 0.25;
  double constraintTolerance = 1e-3;
  double costTolerance = 1e-7;    // inner-loop merit-change tolerance
  double qnSkipThreshold = 1e-12;  // secant update skipped below this step
  int maxIterations = 10000;
  int maxInnerIterations = 400;
  int maxRejections = 40;
  bool recordIterates = false;
  int progressEvery = 0;  // stderr progress print period, 0 = silent
};

struct Iterate {
  std::vector<VecX> legStates;              // per leg; [0] = problem initial state
  std::vector<std::vector<VecX>> controls;  // per leg, per segment
};

Iterate zeroControlIterate(const Problem& problem);

// Per-segment forward-pass products. The state-transition pair covers the
// whole segment (all integration sub-steps) over z = [x; u]; phi1 is exact
// for the discrete RK4 map, phi2 either exact (full SO rollout) or a
// quasi-Newton estimate.
struct SegmentData {
  VecX x0;        // state at the segment start
  VecX u;
  VecX xEnd;
  FlowEval knot;  // evaluation at (x0, u) incl. force derivatives
  MatX phi1;      // N x N
  Tensor3 phi2;   // N x N x N (top nx rows meaningful)
};

struct LegData {
  std::vector<SegmentData> segments;
  VecX xEnd;
};

struct Rollout {
  std::vector<LegData> legs;
  bool finite = true;
};

struct AugLagState {
  std::vector<VecX> boundaryMultipliers;           // per leg
  std::vector<std::vector<VecX>> pathMultipliers;  // per leg, per knot
  double penalty = 10.0;
};

AugLagState initialAugLagState(const Problem& problem, const SolverConfig& cfg);

struct MeritEval {
  double cost = 0.0;       // true cost (running + terminal)
  double merit = 0.0;      // cost + augmented-Lagrangian terms
  double violation = 0.0;  // max boundary |psi| and path max(0, g)
  bool finite = true;
};

// order: 1 = FO STMs, 2 = full SO STMs. previous, when non-null, supplies
// the cached segment data for the quasi-Newton SO-STM update (order 1).
Rollout rolloutTrajectory(const Problem& problem, const Iterate& iterate, int order,
                          const Rollout* previous = nullptr,
                          double qnSkipThreshold = 1e-12);

MeritEval evaluateMerit(const Problem& problem, const Iterate& iterate, const Rollout& rollout,
                        const AugLagState& al);

// Broyden rank-one secant update of the SO STM from consecutive FO STMs:
// contracting the result with dz = zNew - zOld reproduces phi1New - phi1Old
// along dz, leaving the orthogonal complement of phi2Old untouched.
Tensor3 qnUpdateSoStm(const MatX& phi1New, const MatX& phi1Old, const VecX& zNew,
                      const VecX& zOld, const Tensor3& phi2Old, double skipThreshold = 1e-12);

struct SegmentGains {
  VecX kff;  // nu
  MatX K;    // nu x nx
};

struct BoundaryGains {
  VecX ks;  // feedforward for the next leg's initial state
  MatX Ks;  // feedback on the leg's terminal-state deviation
};

struct Sweep {
  std::vector<std::vector<SegmentGains>> gains;  // per leg, per segment
  std::vector<BoundaryGains> boundary;           // per leg (empty for the last)
  double predictedReduction = 0.0;
  bool ok = false;
};

Sweep backwardSweep(const Problem& problem, const Iterate& iterate, const Rollout& rollout,
                    const AugLagState& al, double shift);

// Rolls out the swept policy; alpha scales the feedforward terms only
// (backtracking line search), the feedback gains always apply in full.
Iterate forwardPass(const Problem& problem, const Iterate& iterate, const Rollout& rollout,
                    const Sweep& sweep, double alpha = 1.0);

struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double violation = 0.0;
  bool fullSo = false;
  double wallMs = 0.0;
};

struct SolveReport {
  bool converged = false;
  double finalCost = 0.0;
  double finalViolation = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> log;
  Iterate solution;
  std::vector<Iterate> history;  // per accepted iteration when recorded
};

SolveReport solve(const Problem& problem, const Iterate& initialGuess, const SolverConfig& cfg);

}  // namespace rbd::mddp

#endif  // RBD_MDDP_SOLVER_HPP_
