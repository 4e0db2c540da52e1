#pragma once

#include <string>
#include <vector>

#include "scopf/admm.hpp"
#include "scopf/case.hpp"
#include "scopf/nlp/solver.hpp"
#include "scopf/screening.hpp"
#include "scopf/solution_io.hpp"

namespace scopf {

// Fault-injection knobs for the dispatch machinery. Inert by default.
struct TestHooks {
  std::vector<std::string> crash_ids;  // first attempt on these dies mid-solve
  int writer_delay_ms = 0;
  unsigned jitter_seed = 0;  // nonzero: shuffle worker timing artificially
};

struct RunConfig {
  std::string out_dir = ".";
  int workers = 2;
  double time_limit = 300.0;  // coordination budget, seconds
  double eps = 1e-6;
  double mu = 1e-4;
  CouplingMode coupling = CouplingMode::BigM;
  double per_ctg_seconds = 2.0;
  AdmmConfig admm;
  nlp::SolveOptions nlp;
  TestHooks hooks;
};

// Stage one: base dispatch, screening, and consensus coordination over the
// worst contingencies, leaving a deadline margin for stage two to start.
struct Phase1Result {
  StateVector base;
  std::vector<SeverityRecord> ranking;
  TwoLevelAdmm::RunResult admm;
  int selected = 0;
  bool ran_admm = false;
};
Phase1Result run_phase1(const NetworkCase& nc, const RunConfig& cfg, RunLog& log);

// Stage two: every contingency gets a solution record. Fallback records are
// written up front so the file is complete from the first instant; solver
// results replace them as workers finish.
struct Phase2Result {
  std::vector<CtgRecord> records;  // ranked order
  int solved = 0, fallbacks = 0, requeued = 0;
  bool deadline_hit = false;
};
Phase2Result run_phase2(const NetworkCase& nc, const StateVector& base,
                        const RunConfig& cfg, RunLog& log);

struct FullResult {
  Phase1Result p1;
  Phase2Result p2;
  double objective = 0.0;
};
FullResult run_full(const NetworkCase& nc, const RunConfig& cfg, RunLog& log);

// Re-derive every figure from the solution files alone and cross-check the
// stored values.
struct ReportResult {
  bool ok = true;
  double objective = 0.0;
  double base_cost = 0.0;
  double max_penalty_err = 0.0;   // relative, over contingency records
  double max_base_residual = 0.0;
  std::string detail;
};
ReportResult run_report(const NetworkCase& nc, const std::string& out_dir);

std::string out_path(const std::string& dir, const std::string& name);

}  // namespace scopf
