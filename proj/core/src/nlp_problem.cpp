#include "scopf/nlp/problem.hpp"

namespace scopf::nlp {

double NlpProblem::f(const double* x, double* g) const {
  double val = 0.0;
  for (const auto& t : objective) val += t.eval(x, g);
  return val;
}

int NlpProblem::num_eq() const {
  int m = 0;
  for (const auto& b : eq) m += b.m;
  return m;
}

int NlpProblem::num_ineq() const {
  int m = 0;
  for (const auto& b : ineq) m += b.m;
  return m;
}

}  // namespace scopf::nlp
