#pragma once

#include "scopf/nlp/problem.hpp"

namespace scopf::nlp {

enum class SolveStatus { Converged, IterationLimit, TimeLimit, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolveOptions {
  double tol = 1e-6;       // projected-gradient stationarity target
  double feas_tol = 1e-8;  // max constraint violation (unscaled)
  int max_iter = 500;      // total inner iterations across outer rounds
  double time_limit = 0.0; // seconds; 0 disables
};

// Multipliers carried between related solves. penalty <= 0 means unset.
struct WarmState {
  Eigen::VectorXd eq_mult, ineq_mult;
  double penalty = -1.0;
  bool valid = false;
};

struct NlpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double stationarity = 0.0;
  double feasibility = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double wall_seconds = 0.0;
};

// Augmented-Lagrangian solver over box-constrained iterates. Bounds are hard:
// every returned point satisfies them exactly. Evaluator NaN/inf never
// escapes as a crash; it downgrades the result status instead.
NlpResult solve(const NlpProblem& prob, const Eigen::VectorXd& x0,
                const SolveOptions& opt = {}, WarmState* warm = nullptr);

// Sufficient-decrease acceptance shared by the coordination loop.
bool check_descent(double before, double after);

}  // namespace scopf::nlp
