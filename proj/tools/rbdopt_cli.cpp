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
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rbd/deriv_second_order.hpp"
#include "rbd/diff_oracle.hpp"
#include "rbd/io.hpp"
#include "rbd/quadruped.hpp"

using namespace rbd;

namespace {

struct BlockReport {
  std::string name;
  double maxError = 0.0;
  double tolerance = 0.0;
  void track(double err) { maxError = std::max(maxError, err); }
  bool pass() const { return maxError <= tolerance; }
};

int runCheckDerivatives(const std::string& modelPath, unsigned seed, int count) {
  const KinematicTree tree = loadModelFile(modelPath);
  const ContactSet& contacts = tree.defaultContacts;
  const int n = tree.nv();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto randomVec = [&](int size, double scale) {
    VecX v(size);
    for (int i = 0; i < size; ++i) v(i) = scale * dist(rng);
    return v;
  };
  const OracleConfig cfg;

  std::vector<BlockReport> blocks = {
      {"id dtau/dq", 0, cfg.foTolerance},        {"id dtau/dqd", 0, cfg.foTolerance},
      {"kkt da/dq", 0, cfg.foTolerance},         {"kkt da/dqd", 0, cfg.foTolerance},
      {"kkt da/dtau", 0, cfg.foTolerance},       {"impact da/dq", 0, cfg.foTolerance},
      {"impact da/dqd-", 0, cfg.foTolerance},    {"id d2tau/qq", 0, cfg.soTolerance},
      {"id d2tau/qdqd", 0, cfg.soTolerance},     {"id d2tau/qdq", 0, cfg.soTolerance},
      {"kkt d2a/qq", 0, cfg.soTolerance},        {"kkt d2a/qdqd", 0, cfg.soTolerance},
      {"kkt d2a/qdq", 0, cfg.soTolerance},       {"kkt d2a/tauq", 0, cfg.soTolerance},
      {"impact d2a/qq", 0, cfg.soTolerance},     {"impact d2a/qdq", 0, cfg.soTolerance},
      {"kkt zero blocks", 0, 0.0},               {"impact zero qdqd", 0, 0.0},
  };

  for (int trial = 0; trial < count; ++trial) {
    const VecX q = randomVec(n, 0.6);
    const VecX qd = randomVec(n, 1.0);
    const VecX qdd = randomVec(n, 1.0);
    const VecX tau = randomVec(tree.numActuated(), 10.0);
    const VecX lambda = randomVec(totalConstraintDim(contacts), 20.0);

    const IdFoBlocks idFo = idFoDerivatives(tree, contacts, q, qd, qdd, lambda);
    blocks[0].track(relativeError(
        idFo.dtauDq,
        oracleJacobian(
            [&](const VecX& v) { return constrainedId(tree, contacts, v, qd, qdd, lambda); },
            q, cfg)));
    blocks[1].track(relativeError(
        idFo.dtauDqd,
        oracleJacobian(
            [&](const VecX& v) { return constrainedId(tree, contacts, q, v, qdd, lambda); },
            qd, cfg)));

    auto stackedKkt = [&](const VecX& qq, const VecX& vv, const VecX& tt) {
      const KktSolution sol = kktForwardDynamics(tree, contacts, qq, vv, tt);
      VecX out(sol.qdd.size() + sol.lambda.size());
      out << sol.qdd, -sol.lambda;
      return out;
    };
    const KktFoBlocks fo = kktFdFo(tree, contacts, q, qd, tau);
    blocks[2].track(relativeError(
        fo.daDq,
        oracleJacobian([&](const VecX& v) { return stackedKkt(v, qd, tau); }, q, cfg)));
    blocks[3].track(relativeError(
        fo.daDqd,
        oracleJacobian([&](const VecX& v) { return stackedKkt(q, v, tau); }, qd, cfg)));
    blocks[4].track(relativeError(
        fo.daDtau,
        oracleJacobian([&](const VecX& v) { return stackedKkt(q, qd, v); }, tau, cfg)));

    auto stackedImpact = [&](const VecX& qq, const VecX& vv) {
      const ImpactSolution sol = impactDynamics(tree, contacts, qq, vv, 0.0);
      VecX out(sol.qdPlus.size() + sol.lambdaHat.size());
      out << sol.qdPlus, -sol.lambdaHat;
      return out;
    };
    const ImpactFoBlocks ifo = impactFo(tree, contacts, q, qd, 0.0);
    blocks[5].track(relativeError(
        ifo.daDq, oracleJacobian([&](const VecX& v) { return stackedImpact(v, qd); }, q, cfg)));
    blocks[6].track(relativeError(
        ifo.daDqdMinus,
        oracleJacobian([&](const VecX& v) { return stackedImpact(q, v); }, qd, cfg)));

    const IdSoBlocks idSo = idSoDerivatives(tree, contacts, q, qd, qdd, lambda);
    blocks[7].track(relativeError(
        idSo.d2tauQq,
        oracleHessianTensor(
            VectorFunction(
                [&](const VecX& v) { return constrainedId(tree, contacts, v, qd, qdd, lambda); }),
            q, cfg)));
    blocks[8].track(relativeError(
        idSo.d2tauQdQd,
        oracleHessianTensor(
            VectorFunction(
                [&](const VecX& v) { return constrainedId(tree, contacts, q, v, qdd, lambda); }),
            qd, cfg)));
    blocks[9].track(relativeError(
        idSo.d2tauQdQ,
        oracleHessianTensor(VectorFunction2([&](const VecX& u, const VecX& w) {
                              return constrainedId(tree, contacts, w, u, qdd, lambda);
                            }),
                            qd, q, cfg)));

    const KktSoBlocks so = kktFdSo(tree, contacts, q, qd, tau, fo);
    blocks[10].track(relativeError(
        so.qq, oracleHessianTensor(
                   VectorFunction([&](const VecX& v) { return stackedKkt(v, qd, tau); }), q,
                   cfg)));
    blocks[11].track(relativeError(
        so.qdqd, oracleHessianTensor(
                     VectorFunction([&](const VecX& v) { return stackedKkt(q, v, tau); }), qd,
                     cfg)));
    blocks[12].track(relativeError(
        so.qdq, oracleHessianTensor(VectorFunction2([&](const VecX& u, const VecX& w) {
                                      return stackedKkt(w, u, tau);
                                    }),
                                    qd, q, cfg)));
    blocks[13].track(relativeError(
        so.tauq, oracleHessianTensor(VectorFunction2([&](const VecX& u, const VecX& w) {
                                       return stackedKkt(w, qd, u);
                                     }),
                                     tau, q, cfg)));
    blocks[16].track(so.qdtau.maxAbs());
    blocks[16].track(so.tautau.maxAbs());

    const ImpactSoBlocks iso = impactSo(tree, contacts, q, qd, 0.0, ifo);
    blocks[14].track(relativeError(
        iso.qq, oracleHessianTensor(
                    VectorFunction([&](const VecX& v) { return stackedImpact(v, qd); }), q,
                    cfg)));
    blocks[15].track(relativeError(
        iso.qdq, oracleHessianTensor(VectorFunction2([&](const VecX& u, const VecX& w) {
                                       return stackedImpact(w, u);
                                     }),
                                     qd, q, cfg)));
    blocks[17].track(iso.qdqd.maxAbs());
  }

  bool ok = true;
  std::printf("%-18s %12s %10s  status\n", "block", "max rel err", "tol");
  for (const auto& b : blocks) {
    const bool pass = b.pass();
    ok = ok && pass;
    std::printf("%-18s %12.3e %10.1e  %s\n", b.name.c_str(), b.maxError, b.tolerance,
                pass ? "ok" : "FAIL");
  }
  return ok ? 0 : 1;
}

int parseQn(const std::string& qn) {
  if (qn == "full") return 1;
  if (qn == "inf") return 0;
  return std::stoi(qn);
}

std::string qnLabel(int period) {
  if (period == 1) return "full";
  if (period <= 0) return "inf";
  return std::to_string(period);
}

struct RunResult {
  mddp::SolveReport report;
  double wallMs = 0.0;
};

RunResult runSolve(const QuadrupedSetup& setup, int qnPeriod) {
  mddp::SolverConfig cfg = setup.solver;
  cfg.qnPeriod = qnPeriod;
  const mddp::Iterate guess = mddp::zeroControlIterate(setup.problem);
  const auto tic = std::chrono::steady_clock::now();
  RunResult result;
  result.report = mddp::solve(setup.problem, guess, cfg);
  const auto toc = std::chrono::steady_clock::now();
  result.wallMs = std::chrono::duration<double, std::milli>(toc - tic).count();
  return result;
}

void writeRunArtifacts(const std::string& dir, const QuadrupedSetup& setup,
                       const RunResult& run, int qnPeriod) {
  std::filesystem::create_directories(dir);
  writeTrajectoryCsv(dir + "/trajectory.csv", setup, run.report.solution);
  writeContactForcesCsv(dir + "/contact_forces.csv", setup, run.report.solution);
  writeIterationsCsv(dir + "/iterations.csv", run.report.log);
  writeSummaryJson(dir + "/summary.json", setup, run.report, qnLabel(qnPeriod), run.wallMs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rigid-body dynamics derivatives and multi-shooting DDP"};
  app.require_subcommand(1);

  std::string modelPath;
  std::string tuningPath;
  std::string outDir = "out";
  unsigned seed = 1;
  int count = 100;
  std::string qn = "full";
  std::string variants = "full,5,50,100,inf";

  auto* check = app.add_subcommand("check-derivatives", "oracle-verify analytical derivatives");
  check->add_option("--model", modelPath)->required();
  check->add_option("--seed", seed);
  check->add_option("--count", count);

  auto* solveCmd = app.add_subcommand("solve", "solve the bounding problem");
  solveCmd->add_option("--model", modelPath)->required();
  solveCmd->add_option("--tuning", tuningPath)->required();
  solveCmd->add_option("--qn", qn);
  solveCmd->add_option("--out", outDir);

  auto* bench = app.add_subcommand("benchmark-qn", "compare QN periods");
  bench->add_option("--model", modelPath)->required();
  bench->add_option("--tuning", tuningPath)->required();
  bench->add_option("--variants", variants);
  bench->add_option("--out", outDir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return runCheckDerivatives(modelPath, seed, count);

    const QuadrupedSetup setup = buildQuadrupedProblem(modelPath, loadTuningFile(tuningPath));
    if (solveCmd->parsed()) {
      const int period = parseQn(qn);
      const RunResult run = runSolve(setup, period);
      writeRunArtifacts(outDir, setup, run, period);
      std::printf("converged=%d iterations=%d cost=%.6f violation=%.3e wall_ms=%.1f\n",
                  run.report.converged ? 1 : 0, run.report.iterations, run.report.finalCost,
                  run.report.finalViolation, run.wallMs);
      return run.report.converged ? 0 : 2;
    }

    // benchmark-qn
    std::filesystem::create_directories(outDir);
    std::vector<std::string> names;
    {
      std::string item;
      std::istringstream ss(variants);
      while (std::getline(ss, item, ',')) names.push_back(item);
    }
    std::FILE* table = std::fopen((outDir + "/comparison.csv").c_str(), "w");
    if (table == nullptr) throw std::runtime_error("cannot open comparison.csv");
    std::fprintf(table, "variant,converged,iterations,total_ms,ms_per_iter,final_J,violation\n");
    std::printf("%-6s %9s %11s %12s %12s %12s\n", "qn", "iters", "total_ms", "ms/iter",
                "final_J", "violation");
    bool allConverged = true;
    for (const std::string& name : names) {
      const int period = parseQn(name);
      const RunResult run = runSolve(setup, period);
      writeRunArtifacts(outDir + "/" + name, setup, run, period);
      const double perIter =
          run.report.iterations > 0 ? run.wallMs / run.report.iterations : 0.0;
      allConverged = allConverged && run.report.converged;
      std::fprintf(table, "%s,%d,%d,%.3f,%.3f,%.9g,%.3e\n", name.c_str(),
                   run.report.converged ? 1 : 0, run.report.iterations, run.wallMs, perIter,
                   run.report.finalCost, run.report.finalViolation);
      std::printf("%-6s %9d %11.1f %12.3f %12.6f %12.3e %s\n", name.c_str(),
                  run.report.iterations, run.wallMs, perIter, run.report.finalCost,
                  run.report.finalViolation, run.report.converged ? "" : "(not converged)");
    }
    std::fclose(table);
    return allConverged ? 0 : 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}
