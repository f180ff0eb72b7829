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

#ifndef RBD_IO_HPP_
#define RBD_IO_HPP_

#include <string>
#include <vector>

#include "rbd/quadruped.hpp"

namespace rbd {

// trajectory.csv: t, q[7], qd[7], tau[4] sampled at the segment knots.
void writeTrajectoryCsv(const std::string& path, const QuadrupedSetup& setup,
                        const mddp::Iterate& solution);

// contact_forces.csv: t, lambda_x, lambda_z, phase (zeros in flight).
void writeContactForcesCsv(const std::string& path, const QuadrupedSetup& setup,
                           const mddp::Iterate& solution);

// iterations.csv: iter, J, violation, mode, wall_ms.
void writeIterationsCsv(const std::string& path, const std::vector<mddp::IterationRecord>& log);

void writeSummaryJson(const std::string& path, const QuadrupedSetup& setup,
                      const mddp::SolveReport& report, const std::string& qnLabel,
                      double totalWallMs);

}  // namespace rbd

#endif  // RBD_IO_HPP_
