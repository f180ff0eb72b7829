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
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <utility>

#include "rbd/mddp/solver.hpp"

namespace rbd::mddp {

namespace {

VecX integrateSegment(const PhaseDynamics& dyn, const VecX& x0, const VecX& u, double h,
                      int steps) {
  VecX x = x0;
  FlowEval e;
  for (int step = 0; step < steps; ++step) {
    dyn.eval(x, u, 0, e);
    const VecX k1 = e.xdot;
    dyn.eval(x + 0.5 * h * k1, u, 0, e);
    const VecX k2 = e.xdot;
    dyn.eval(x + 0.5 * h * k2, u, 0, e);
    const VecX k3 = e.xdot;
    dyn.eval(x + h * k3, u, 0, e);
    const VecX k4 = e.xdot;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) return x;
  }
  return x;
}

bool fullSoIteration(int index, int qnPeriod) {
  if (qnPeriod <= 0) return index == 1;
  return ((index - 1) % qnPeriod) == 0;
}

}  // namespace

AugLagState initialAugLagState(const Problem& problem, const SolverConfig& cfg) {
  const std::vector<LegLayout> layout = legLayout(problem);
  AugLagState al;
  al.penalty = cfg.penaltyInit;
  al.boundaryMultipliers.resize(layout.size());
  al.pathMultipliers.resize(layout.size());
  for (size_t l = 0; l < layout.size(); ++l) {
    const BoundaryConstraint bc = legBoundary(problem, layout, static_cast<int>(l));
    al.boundaryMultipliers[l] = VecX::Zero(bc.dim);
    al.pathMultipliers[l].assign(layout[l].segments,
                                 VecX::Zero(problem.phases[layout[l].phase].path.dim()));
  }
  return al;
}

Iterate forwardPass(const Problem& problem, const Iterate& iterate, const Rollout& rollout,
                    const Sweep& sweep, double alpha) {
  const std::vector<LegLayout> layout = legLayout(problem);
  Iterate next = iterate;
  for (size_t l = 0; l < layout.size(); ++l) {
    const Phase& phase = problem.phases[layout[l].phase];
    const double h = phase.duration / phase.segments / phase.stepsPerSegment;
    VecX x = next.legStates[l];
    for (int s = 0; s < layout[l].segments; ++s) {
      const SegmentData& seg = rollout.legs[l].segments[s];
      const SegmentGains& g = sweep.gains[l][s];
      next.controls[l][s] = iterate.controls[l][s] + alpha * g.kff + g.K * (x - seg.x0);
      x = integrateSegment(*phase.dynamics, x, next.controls[l][s], h, phase.stepsPerSegment);
      if (!x.allFinite()) return next;
    }
    if (l + 1 < layout.size()) {
      const BoundaryGains& bg = sweep.boundary[l];
      next.legStates[l + 1] =
          iterate.legStates[l + 1] + alpha * bg.ks + bg.Ks * (x - rollout.legs[l].xEnd);
    }
  }
  return next;
}

SolveReport solve(const Problem& problem, const Iterate& initialGuess, const SolverConfig& cfg) {
  SolveReport report;
  Iterate cur = initialGuess;
  cur.legStates[0] = problem.initialState;
  AugLagState al = initialAugLagState(problem, cfg);

  Rollout deriv;
  bool derivReady = false;
  Rollout prevDeriv;
  bool havePrev = false;
  double nu = cfg.trInitialShift;
  int accepted = 0;
  const int maxOuter = 200;

  MeritEval curEval;
  {
    const Rollout r0 = rolloutTrajectory(problem, cur, 0);
    curEval = evaluateMerit(problem, cur, r0, al);
  }

  double outerPrevViolation = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int outer = 0; outer < maxOuter && !converged; ++outer) {
    bool innerConverged = false;
    bool stuck = false;
    int innerCount = 0;
    while (accepted < cfg.maxIterations && innerCount < cfg.maxInnerIterations) {
      const auto tic = std::chrono::steady_clock::now();
      const int index = accepted + 1;
      const bool fullSo = fullSoIteration(index, cfg.qnPeriod);
      if (!derivReady) {
        deriv = rolloutTrajectory(problem, cur, fullSo ? 2 : 1,
                                  (fullSo || !havePrev) ? nullptr : &prevDeriv,
                                  cfg.qnSkipThreshold);
        derivReady = true;
      }

      bool acceptedStep = false;
      double improvement = 0.0;
      for (int rejections = 0; rejections <= cfg.maxRejections; ++rejections) {
        const Sweep sweep = backwardSweep(problem, cur, deriv, al, nu);
        if (sweep.ok) {
          if (rejections == 0 && nu <= cfg.trKick &&
              sweep.predictedReduction < cfg.costTolerance) {
            innerConverged = true;
            break;
          }
          // Backtracking on the feedforward: the quadratic model can be a
          // poor predictor across impact boundaries, so shorten the step
          // before resorting to a larger regularization shift.
          for (double alpha = 1.0; alpha >= 1e-5; alpha *= 0.5) {
            Iterate cand;
            try {
              cand = forwardPass(problem, cur, deriv, sweep, alpha);
            } catch (const SingularContactError&) {
              continue;  // candidate passed through a kinematic singularity
            }
            const Rollout candRoll = rolloutTrajectory(problem, cand, 0);
            const MeritEval candEval = evaluateMerit(problem, cand, candRoll, al);
            if (candEval.finite && candEval.merit < curEval.merit) {
              improvement = curEval.merit - candEval.merit;
              if (std::getenv("RBDOPT_LS_DEBUG") != nullptr) {
                std::fprintf(stderr, "ls iter %d nu %.1e alpha %.3g pred %.4g actual %.4g\n",
                             accepted + 1, nu, alpha, sweep.predictedReduction, improvement);
              }
              cur = cand;
              curEval = candEval;
              nu *= cfg.trShrink;
              if (nu < cfg.trZeroThreshold) nu = 0.0;
              acceptedStep = true;
              break;
            }
          }
          if (acceptedStep) break;
        }
        nu = std::max(nu * cfg.trGrow, cfg.trKick);
        if (nu > 1e12) break;  // step is numerically zero; give up on this subproblem
      }
      if (innerConverged) break;
      if (!acceptedStep) {
        stuck = true;
        break;
      }

      ++accepted;
      ++innerCount;
      prevDeriv = std::move(deriv);
      havePrev = true;
      derivReady = false;
      const auto toc = std::chrono::steady_clock::now();
      IterationRecord rec;
      rec.iter = accepted;
      rec.cost = curEval.cost;
      rec.violation = curEval.violation;
      rec.fullSo = fullSo;
      rec.wallMs = std::chrono::duration<double, std::milli>(toc - tic).count();
      report.log.push_back(rec);
      if (cfg.recordIterates) report.history.push_back(cur);
      if (cfg.progressEvery > 0 && accepted % cfg.progressEvery == 0) {
        std::fprintf(stderr, "iter %d cost %.6g violation %.3e %s nu %.1e merit %.8g\n",
                     accepted, curEval.cost, curEval.violation, fullSo ? "SO" : "QN", nu,
                     curEval.merit);
      }
      if (improvement < cfg.costTolerance && nu <= cfg.trKick) {
        innerConverged = true;
        break;
      }
    }

    if ((innerConverged || stuck) && curEval.violation < cfg.constraintTolerance) {
      converged = true;
      break;
    }
    if (accepted >= cfg.maxIterations) break;
    if (stuck && innerCount == 0) break;  // no step improves the merit; give up

    // Outer update: first-order multiplier steps, plus penalty growth when
    // the violation failed to shrink enough over the last stage.
    {
      const std::vector<LegLayout> layout = legLayout(problem);
      const Rollout r0 = derivReady ? std::move(deriv) : rolloutTrajectory(problem, cur, 0);
      derivReady = false;
      for (size_t l = 0; l < layout.size(); ++l) {
        const Phase& phase = problem.phases[layout[l].phase];
        const BoundaryConstraint bc = legBoundary(problem, layout, static_cast<int>(l));
        if (bc.dim > 0) {
          const VecX sn = (l + 1 < layout.size()) ? cur.legStates[l + 1] : VecX();
          const VecX psi = bc.value(r0.legs[l].xEnd, sn);
          al.boundaryMultipliers[l] -= al.penalty * psi;
        }
        const int m = phase.path.dim();
        for (int s = 0; s < layout[l].segments; ++s) {
          if (m == 0) continue;
          const SegmentData& seg = r0.legs[l].segments[s];
          VecX g = phase.path.c0;
          if (phase.path.cx.size() > 0) g += phase.path.cx * seg.x0;
          if (phase.path.cu.size() > 0) g += phase.path.cu * seg.u;
          if (phase.path.clam.size() > 0 && seg.knot.lambda.size() > 0) {
            g += phase.path.clam * seg.knot.lambda;
          }
          VecX& mu = al.pathMultipliers[l][s];
          mu = (mu + al.penalty * g).cwiseMax(0.0);
        }
      }
    }
    if (curEval.violation > cfg.violationShrinkTarget * outerPrevViolation) {
      al.penalty = std::min(al.penalty * cfg.penaltyGrowth, cfg.penaltyMax);
    }
    outerPrevViolation = curEval.violation;
    {
      const Rollout r1 = rolloutTrajectory(problem, cur, 0);
      curEval = evaluateMerit(problem, cur, r1, al);
    }
    nu = cfg.trInitialShift;  // the merit landscape changed; restart the shift
    if (cfg.progressEvery > 0) {
      std::fprintf(stderr,
                   "outer %d accepted %d inner %d%s penalty %.1e nu %.1e violation %.3e\n",
                   outer, accepted, innerCount, stuck ? " (stuck)" : "", al.penalty, nu,
                   curEval.violation);
    }
  }

  report.converged = converged;
  report.iterations = accepted;
  report.finalCost = curEval.cost;
  report.finalViolation = curEval.violation;
  report.solution = cur;
  return report;
}

}  // namespace rbd::mddp
