#pragma once

#include "scopf/case.hpp"

namespace scopf {

// Power entering a branch from each terminal, receiving-end convention:
// positive values flow from the bus into the branch.
struct BranchFlow {
  double p_o = 0.0, q_o = 0.0;  // origin terminal
  double p_d = 0.0, q_d = 0.0;  // destination terminal
};

// Partials of (p_o, q_o, p_d, q_d) w.r.t. (v_o, v_d, th_o, th_d), row-major.
struct BranchFlowJac {
  double d[4][4] = {};
};

BranchFlow line_flow(const Line& e, double v_o, double v_d, double th_o, double th_d);
BranchFlow transformer_flow(const Transformer& f, double v_o, double v_d,
                            double th_o, double th_d);

BranchFlow line_flow_jac(const Line& e, double v_o, double v_d, double th_o,
                         double th_d, BranchFlowJac& jac);
BranchFlow transformer_flow_jac(const Transformer& f, double v_o, double v_d,
                                double th_o, double th_d, BranchFlowJac& jac);

}  // namespace scopf
