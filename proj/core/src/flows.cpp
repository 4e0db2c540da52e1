#include "scopf/flows.hpp"

#include <cmath>

namespace scopf {

BranchFlow line_flow(const Line& e, double v_o, double v_d, double th_o, double th_d) {
  const double g = e.g, b = e.b, bc = e.b_ch * 0.5;
  const double a = th_o - th_d;
  const double ca = std::cos(a), sa = std::sin(a);
  const double vv = v_o * v_d;
  BranchFlow f;
  f.p_o = g * v_o * v_o + (-g * ca - b * sa) * vv;
  f.q_o = -(b + bc) * v_o * v_o + (b * ca - g * sa) * vv;
  f.p_d = g * v_d * v_d + (-g * ca + b * sa) * vv;
  f.q_d = -(b + bc) * v_d * v_d + (b * ca + g * sa) * vv;
  return f;
}

BranchFlow line_flow_jac(const Line& e, double v_o, double v_d, double th_o,
                         double th_d, BranchFlowJac& jac) {
  const double g = e.g, b = e.b, bc = e.b_ch * 0.5;
  const double a = th_o - th_d;
  const double ca = std::cos(a), sa = std::sin(a);
  const double vv = v_o * v_d;
  const double t1 = -g * ca - b * sa, t2 = b * ca - g * sa;
  const double t3 = -g * ca + b * sa, t4 = b * ca + g * sa;
  BranchFlow f;
  f.p_o = g * v_o * v_o + t1 * vv;
  f.q_o = -(b + bc) * v_o * v_o + t2 * vv;
  f.p_d = g * v_d * v_d + t3 * vv;
  f.q_d = -(b + bc) * v_d * v_d + t4 * vv;
  // dA for each output, A = th_o - th_d
  const double dpo = (g * sa - b * ca) * vv;
  const double dqo = (-b * sa - g * ca) * vv;
  const double dpd = (g * sa + b * ca) * vv;
  const double dqd = (-b * sa + g * ca) * vv;
  jac.d[0][0] = 2 * g * v_o + t1 * v_d;
  jac.d[0][1] = t1 * v_o;
  jac.d[0][2] = dpo;
  jac.d[0][3] = -dpo;
  jac.d[1][0] = -2 * (b + bc) * v_o + t2 * v_d;
  jac.d[1][1] = t2 * v_o;
  jac.d[1][2] = dqo;
  jac.d[1][3] = -dqo;
  jac.d[2][0] = t3 * v_d;
  jac.d[2][1] = 2 * g * v_d + t3 * v_o;
  jac.d[2][2] = dpd;
  jac.d[2][3] = -dpd;
  jac.d[3][0] = t4 * v_d;
  jac.d[3][1] = -2 * (b + bc) * v_d + t4 * v_o;
  jac.d[3][2] = dqd;
  jac.d[3][3] = -dqd;
  return f;
}

// Two-winding transformer, tap ratio and phase shift on the origin winding.
// Series admittance y and charging split as for a line; the origin shunt and
// series terms see the winding through the turns ratio.
BranchFlow transformer_flow(const Transformer& x, double v_o, double v_d,
                            double th_o, double th_d) {
  const double g = x.g, b = x.b, bc = x.b_ch * 0.5, tau = x.tap;
  const double a = th_o - th_d - x.shift;
  const double ca = std::cos(a), sa = std::sin(a);
  const double vv = v_o * v_d / tau;
  BranchFlow f;
  f.p_o = (g / (tau * tau)) * v_o * v_o + (-g * ca - b * sa) * vv;
  f.q_o = -((b + bc) / (tau * tau)) * v_o * v_o + (b * ca - g * sa) * vv;
  f.p_d = g * v_d * v_d + (-g * ca + b * sa) * vv;
  f.q_d = -(b + bc) * v_d * v_d + (b * ca + g * sa) * vv;
  return f;
}

BranchFlow transformer_flow_jac(const Transformer& x, double v_o, double v_d,
                                double th_o, double th_d, BranchFlowJac& jac) {
  const double g = x.g, b = x.b, bc = x.b_ch * 0.5, tau = x.tap;
  const double a = th_o - th_d - x.shift;
  const double ca = std::cos(a), sa = std::sin(a);
  const double vv = v_o * v_d / tau;
  const double t1 = (-g * ca - b * sa) / tau, t2 = (b * ca - g * sa) / tau;
  const double t3 = (-g * ca + b * sa) / tau, t4 = (b * ca + g * sa) / tau;
  BranchFlow f;
  f.p_o = (g / (tau * tau)) * v_o * v_o + t1 * v_o * v_d;
  f.q_o = -((b + bc) / (tau * tau)) * v_o * v_o + t2 * v_o * v_d;
  f.p_d = g * v_d * v_d + t3 * v_o * v_d;
  f.q_d = -(b + bc) * v_d * v_d + t4 * v_o * v_d;
  const double dpo = (g * sa - b * ca) * vv;
  const double dqo = (-b * sa - g * ca) * vv;
  const double dpd = (g * sa + b * ca) * vv;
  const double dqd = (-b * sa + g * ca) * vv;
  jac.d[0][0] = 2 * (g / (tau * tau)) * v_o + t1 * v_d;
  jac.d[0][1] = t1 * v_o;
  jac.d[0][2] = dpo;
  jac.d[0][3] = -dpo;
  jac.d[1][0] = -2 * ((b + bc) / (tau * tau)) * v_o + t2 * v_d;
  jac.d[1][1] = t2 * v_o;
  jac.d[1][2] = dqo;
  jac.d[1][3] = -dqo;
  jac.d[2][0] = t3 * v_d;
  jac.d[2][1] = 2 * g * v_d + t3 * v_o;
  jac.d[2][2] = dpd;
  jac.d[2][3] = -dpd;
  jac.d[3][0] = t4 * v_d;
  jac.d[3][1] = -2 * (b + bc) * v_d + t4 * v_o;
  jac.d[3][2] = dqd;
  jac.d[3][3] = -dqd;
  return f;
}

}  // namespace scopf
