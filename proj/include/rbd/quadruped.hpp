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

#ifndef RBD_QUADRUPED_HPP_
#define RBD_QUADRUPED_HPP_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rbd/mddp/solver.hpp"
#include "rbd/model.hpp"

namespace rbd {

// Line-oriented "key = value(s)" tuning files; '#' starts a comment.
using Tuning = std::map<std::string, std::vector<double>>;

Tuning parseTuning(const std::string& text);
Tuning loadTuningFile(const std::string& path);

double tuningScalar(const Tuning& t, const std::string& key, double fallback);
std::vector<double> tuningVector(const Tuning& t, const std::string& key,
                                 const std::vector<double>& fallback);

// The five-phase bounding problem: back-stance, flight, front-stance,
// flight, back-stance. Owns the kinematic tree referenced by the phase
// dynamics, so keep the setup alive while the problem is in use.
struct QuadrupedSetup {
  std::shared_ptr<KinematicTree> tree;
  mddp::Problem problem;
  mddp::SolverConfig solver;
  VecX standingPose;  // q of the reference standing configuration
  double forwardSpeed = 0.0;
  std::vector<std::string> phaseNames;
  std::vector<int> phaseContactBody;  // body index in contact, -1 in flight
};

QuadrupedSetup buildQuadrupedProblem(const std::string& modelPath, const Tuning& tuning);

}  // namespace rbd

#endif  // RBD_QUADRUPED_HPP_
