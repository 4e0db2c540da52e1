#pragma once

#include <utility>
#include <vector>

#include "scopf/case.hpp"
#include "scopf/flows.hpp"
#include "scopf/state.hpp"

namespace scopf {

// Nodal balance residuals per bus (active, reactive), slack terms included:
// r_i = injection_i - load_i - branch_draw_i - (sig_plus_i - sig_minus_i).
struct NodalResiduals {
  std::vector<double> p, q;
};
NodalResiduals nodal_residuals(const NetworkCase& nc, const StateTopology& topo,
                               const StateVector& sv);

// Rating violations max(0, |S| - limit - slack) per active branch end.
// Line limits are current ratings scaled by the terminal voltage; transformer
// limits are apparent-power ratings. Lines first, then transformers.
struct BranchEndViolation {
  double o = 0.0, d = 0.0;
};
std::vector<BranchEndViolation> branch_limit_residuals(const NetworkCase& nc,
                                                       const StateTopology& topo,
                                                       const StateVector& sv);

// Slack penalty c_sigma for one state.
double state_penalty(const NetworkCase& nc, const StateTopology& topo,
                     const StateVector& sv);

// Generation cost of the state's dispatch.
double generation_cost(const NetworkCase& nc, const StateTopology& topo,
                       const StateVector& sv);

// Total objective: generation cost + base penalty + average contingency
// penalty. ctg_penalties must have one entry per contingency in the case.
double objective(const NetworkCase& nc, const StateVector& base,
                 const std::vector<double>& ctg_penalties);

// Zero the slacks and recompute them so nodal and branch residuals vanish:
// the minimal-slack completion of (v, theta, p, q).
void absorb_residuals(const NetworkCase& nc, const StateTopology& topo, StateVector& sv);

// Carry a base operating point into contingency state k: drop the outaged
// element, keep voltages and surviving dispatch, absorb the imbalance into
// slacks. Also the default stand-in solution when a contingency solve fails.
StateVector restrict_to_state(const NetworkCase& nc, const StateVector& base, int k);

// Worst-case deviation of a contingency point from the response rules, taken
// over surviving generators. active: |p_gk - clamp(p_g0 + alpha_g*delta)|.
// reactive: Euclidean distance of (q_gk, v_k at the generator bus) from the
// PV/PQ switching set anchored at the base voltage.
struct DisjunctionGap {
  double active = 0.0, reactive = 0.0;
};
DisjunctionGap disjunction_violation(const NetworkCase& nc, int k,
                                     const StateVector& base, const StateVector& ctg);

// Distance of one (q, v) pair from the switching set
//   {q in [q_lo,q_hi], v = v0} u {q = q_hi, v in [v_lo,v0]} u {q = q_lo, v in [v0,v_hi]}.
double reactive_set_distance(double q, double v, double q_lo, double q_hi,
                             double v_lo, double v_hi, double v0);

}  // namespace scopf
