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

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "rbd/io.hpp"

namespace rbd {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream openOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

// Visit every knot of the solution in time order.
template <typename Fn>
void forEachKnot(const QuadrupedSetup& setup, const mddp::Iterate& solution, Fn&& fn) {
  const mddp::Rollout roll = mddp::rolloutTrajectory(setup.problem, solution, 0);
  const std::vector<mddp::LegLayout> layout = mddp::legLayout(setup.problem);
  std::vector<double> phaseStart(setup.problem.phases.size(), 0.0);
  for (size_t p = 1; p < phaseStart.size(); ++p) {
    phaseStart[p] = phaseStart[p - 1] + setup.problem.phases[p - 1].duration;
  }
  std::vector<int> segmentsSeen(setup.problem.phases.size(), 0);
  for (size_t l = 0; l < layout.size(); ++l) {
    const int p = layout[l].phase;
    const mddp::Phase& phase = setup.problem.phases[p];
    const double dt = phase.duration / phase.segments;
    for (size_t s = 0; s < roll.legs[l].segments.size(); ++s) {
      const double t = phaseStart[p] + dt * segmentsSeen[p]++;
      fn(p, t, roll.legs[l].segments[s]);
    }
  }
}

}  // namespace

void writeTrajectoryCsv(const std::string& path, const QuadrupedSetup& setup,
                        const mddp::Iterate& solution) {
  std::ofstream out = openOut(path);
  const int n = setup.tree->nv();
  out << "t";
  for (int i = 0; i < n; ++i) out << ",q" << i;
  for (int i = 0; i < n; ++i) out << ",qd" << i;
  for (int i = 0; i < setup.tree->numActuated(); ++i) out << ",tau" << i;
  out << "\n";
  forEachKnot(setup, solution, [&](int, double t, const mddp::SegmentData& seg) {
    out << num(t);
    for (int i = 0; i < seg.x0.size(); ++i) out << "," << num(seg.x0(i));
    for (int i = 0; i < seg.u.size(); ++i) out << "," << num(seg.u(i));
    out << "\n";
  });
}

void writeContactForcesCsv(const std::string& path, const QuadrupedSetup& setup,
                           const mddp::Iterate& solution) {
  std::ofstream out = openOut(path);
  out << "t,lambda_x,lambda_z,phase\n";
  forEachKnot(setup, solution, [&](int p, double t, const mddp::SegmentData& seg) {
    const double lx = seg.knot.lambda.size() > 0 ? seg.knot.lambda(0) : 0.0;
    const double lz = seg.knot.lambda.size() > 1 ? seg.knot.lambda(1) : 0.0;
    out << num(t) << "," << num(lx) << "," << num(lz) << "," << p << "\n";
  });
}

void writeIterationsCsv(const std::string& path,
                        const std::vector<mddp::IterationRecord>& log) {
  std::ofstream out = openOut(path);
  out << "iter,J,violation,mode,wall_ms\n";
  for (const auto& rec : log) {
    out << rec.iter << "," << num(rec.cost) << "," << num(rec.violation) << ","
        << (rec.fullSo ? "SO" : "QN") << "," << num(rec.wallMs) << "\n";
  }
}

void writeSummaryJson(const std::string& path, const QuadrupedSetup& setup,
                      const mddp::SolveReport& report, const std::string& qnLabel,
                      double totalWallMs) {
  nlohmann::json j;
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["final_cost"] = report.finalCost;
  j["final_violation"] = report.finalViolation;
  j["total_wall_ms"] = totalWallMs;
  j["qn"] = qnLabel;
  j["config"]["constraint_tolerance"] = setup.solver.constraintTolerance;
  j["config"]["cost_tolerance"] = setup.solver.costTolerance;
  j["config"]["max_iterations"] = setup.solver.maxIterations;
  j["config"]["forward_speed"] = setup.forwardSpeed;
  j["config"]["phases"] = setup.phaseNames;
  std::ofstream out = openOut(path);
  out << j.dump(2) << "\n";
}

}  // namespace rbd
