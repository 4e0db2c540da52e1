#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace scopf::nlp {

struct JacEntry {
  int row = 0, col = 0;
  double val = 0.0;
};

// Vector-valued constraint block: c(x) = 0 or c(x) <= 0 componentwise.
struct ConstraintBlock {
  enum class Kind { Equality, Inequality };
  Kind kind = Kind::Equality;
  int m = 0;
  bool linear = false;
  std::string label;
  std::function<void(const double* x, double* out)> eval;
  // Append Jacobian entries with rows local to this block.
  std::function<void(const double* x, std::vector<JacEntry>& out)> jac;
};

// Objective contribution: returns its value, accumulates gradient when g != nullptr.
struct ObjectiveTerm {
  std::function<double(const double* x, double* g)> eval;
};

struct NlpProblem {
  int n = 0;
  Eigen::VectorXd lo, hi;
  std::vector<ObjectiveTerm> objective;
  std::vector<ConstraintBlock> eq, ineq;

  double f(const double* x, double* g) const;
  int num_eq() const;
  int num_ineq() const;
};

}  // namespace scopf::nlp
