#pragma once

#include <string>
#include <vector>

#include "scopf/case.hpp"
#include "scopf/nlp/solver.hpp"
#include "scopf/state.hpp"

namespace scopf {

// Generators pinned against a limit by the post-contingency response, found
// by probing a relaxed solution with tolerance mu. Indices are case indices.
struct RestrictionSets {
  std::vector<int> p_upper, p_lower;
  std::vector<int> q_upper, q_lower;
  bool any() const {
    return !(p_upper.empty() && p_lower.empty() && q_upper.empty() && q_lower.empty());
  }
};

struct RecourseOptions {
  double eps = 1e-6;  // response/voltage smoothing width
  double mu = 1e-4;   // limit-detection and acceptance tolerance
  nlp::SolveOptions nlp;
};

struct RecourseResult {
  StateVector sv;
  double penalty = 0.0;
  std::string path;  // smoothed | restricted | fallback
  bool ok = false;
  nlp::SolveStatus status = nlp::SolveStatus::Converged;
};

// Relaxed post-contingency redispatch: smoothed response around the base
// dispatch plus the voltage-split reactive relaxation, minimizing shed cost.
StateVector solve_smoothed_recourse(const NetworkCase& nc, const StateVector& base,
                                    int k, const RecourseOptions& opt, bool* ok,
                                    nlp::SolveStatus* status = nullptr);

// Classify which limits the relaxed point is leaning on.
RestrictionSets detect_restrictions(const NetworkCase& nc, const StateVector& base,
                                    int k, const StateVector& relaxed, double mu);

// Exact redispatch restricted to the limit pattern found above: pinned
// generators sit on their bounds, the rest follow the response line, and
// generator-bus voltages move only in the direction their set allows.
StateVector solve_restricted_recourse(const NetworkCase& nc, const StateVector& base,
                                      int k, const RestrictionSets& sets,
                                      const StateVector& start,
                                      const RecourseOptions& opt, bool* ok,
                                      nlp::SolveStatus* status = nullptr);

// Snap a near-feasible point exactly onto the response rules: project active
// power onto the response line, settle generator buses onto the switching
// set, then recompute the slacks.
void polish_solution(const NetworkCase& nc, const StateVector& base, int k,
                     StateVector& sv);

// Full pipeline for one contingency: relax, gate on the disjunction gap,
// restrict if needed, polish, and fall back to the carried base point when
// the solves fail.
RecourseResult solve_contingency(const NetworkCase& nc, const StateVector& base,
                                 int k, const RecourseOptions& opt = {});

}  // namespace scopf
