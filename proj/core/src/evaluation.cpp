#include "scopf/evaluation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace scopf {

namespace {

// Accumulate branch draws (power leaving each bus into branches) for a state.
void branch_draws(const NetworkCase& nc, const StateTopology& topo,
                  const StateVector& sv, std::vector<double>& dp,
                  std::vector<double>& dq) {
  dp.assign(nc.buses.size(), 0.0);
  dq.assign(nc.buses.size(), 0.0);
  for (int ei : topo.lines) {
    const auto& e = nc.lines[ei];
    auto f = line_flow(e, sv.v[e.from], sv.v[e.to], sv.theta[e.from], sv.theta[e.to]);
    dp[e.from] += f.p_o;
    dq[e.from] += f.q_o;
    dp[e.to] += f.p_d;
    dq[e.to] += f.q_d;
  }
  for (int fi : topo.xfmrs) {
    const auto& x = nc.transformers[fi];
    auto f = transformer_flow(x, sv.v[x.from], sv.v[x.to], sv.theta[x.from], sv.theta[x.to]);
    dp[x.from] += f.p_o;
    dq[x.from] += f.q_o;
    dp[x.to] += f.p_d;
    dq[x.to] += f.q_d;
  }
}

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

NodalResiduals nodal_residuals(const NetworkCase& nc, const StateTopology& topo,
                               const StateVector& sv) {
  std::vector<double> dp, dq;
  branch_draws(nc, topo, sv, dp, dq);
  NodalResiduals r;
  r.p.assign(nc.buses.size(), 0.0);
  r.q.assign(nc.buses.size(), 0.0);
  for (size_t i = 0; i < nc.buses.size(); ++i) {
    r.p[i] = -nc.buses[i].load_p - dp[i] - sv.sig_pp[i] + sv.sig_pm[i];
    r.q[i] = -nc.buses[i].load_q - dq[i] - sv.sig_qp[i] + sv.sig_qm[i];
  }
  for (size_t gp = 0; gp < topo.gens.size(); ++gp) {
    const auto& g = nc.generators[topo.gens[gp]];
    r.p[g.bus] += sv.p[gp];
    r.q[g.bus] += sv.q[gp];
  }
  return r;
}

std::vector<BranchEndViolation> branch_limit_residuals(const NetworkCase& nc,
                                                       const StateTopology& topo,
                                                       const StateVector& sv) {
  std::vector<BranchEndViolation> out(topo.num_branches());
  const bool ctg = topo.state > 0;
  int at = 0;
  for (int ei : topo.lines) {
    const auto& e = nc.lines[ei];
    auto f = line_flow(e, sv.v[e.from], sv.v[e.to], sv.theta[e.from], sv.theta[e.to]);
    const double r = ctg ? e.r_max_ctg : e.r_max_base;
    const double s = sv.sig_s[at];
    out[at].o = std::max(0.0, std::hypot(f.p_o, f.q_o) - r * sv.v[e.from] - s);
    out[at].d = std::max(0.0, std::hypot(f.p_d, f.q_d) - r * sv.v[e.to] - s);
    ++at;
  }
  for (int fi : topo.xfmrs) {
    const auto& x = nc.transformers[fi];
    auto f = transformer_flow(x, sv.v[x.from], sv.v[x.to], sv.theta[x.from], sv.theta[x.to]);
    const double r = ctg ? x.s_max_ctg : x.s_max_base;
    const double s = sv.sig_s[at];
    out[at].o = std::max(0.0, std::hypot(f.p_o, f.q_o) - r - s);
    out[at].d = std::max(0.0, std::hypot(f.p_d, f.q_d) - r - s);
    ++at;
  }
  return out;
}

double state_penalty(const NetworkCase& nc, const StateTopology& topo,
                     const StateVector& sv) {
  double c = 0.0;
  for (size_t i = 0; i < nc.buses.size(); ++i) {
    c += nc.penalties.bus_p.eval(sv.sig_pp[i] + sv.sig_pm[i]);
    c += nc.penalties.bus_q.eval(sv.sig_qp[i] + sv.sig_qm[i]);
  }
  for (double s : sv.sig_s) c += nc.penalties.branch_s.eval(s);
  (void)topo;
  return c;
}

double generation_cost(const NetworkCase& nc, const StateTopology& topo,
                       const StateVector& sv) {
  double c = 0.0;
  for (size_t gp = 0; gp < topo.gens.size(); ++gp)
    c += nc.generators[topo.gens[gp]].cost.eval(std::max(0.0, sv.p[gp]));
  return c;
}

double objective(const NetworkCase& nc, const StateVector& base,
                 const std::vector<double>& ctg_penalties) {
  assert(ctg_penalties.size() == nc.contingencies.size());
  auto topo0 = StateTopology::make(nc, 0);
  double obj = generation_cost(nc, topo0, base) + state_penalty(nc, topo0, base);
  if (!ctg_penalties.empty()) {
    double sum = 0.0;
    for (double c : ctg_penalties) sum += c;
    obj += sum / static_cast<double>(ctg_penalties.size());
  }
  return obj;
}

void absorb_residuals(const NetworkCase& nc, const StateTopology& topo, StateVector& sv) {
  std::vector<double> dp, dq;
  branch_draws(nc, topo, sv, dp, dq);
  std::vector<double> inj_p(nc.buses.size(), 0.0), inj_q(nc.buses.size(), 0.0);
  for (size_t gp = 0; gp < topo.gens.size(); ++gp) {
    const auto& g = nc.generators[topo.gens[gp]];
    inj_p[g.bus] += sv.p[gp];
    inj_q[g.bus] += sv.q[gp];
  }
  for (size_t i = 0; i < nc.buses.size(); ++i) {
    const double mp = inj_p[i] - nc.buses[i].load_p - dp[i];
    const double mq = inj_q[i] - nc.buses[i].load_q - dq[i];
    sv.sig_pp[i] = std::max(mp, 0.0);
    sv.sig_pm[i] = std::max(-mp, 0.0);
    sv.sig_qp[i] = std::max(mq, 0.0);
    sv.sig_qm[i] = std::max(-mq, 0.0);
  }
  const bool ctg = topo.state > 0;
  int at = 0;
  for (int ei : topo.lines) {
    const auto& e = nc.lines[ei];
    auto f = line_flow(e, sv.v[e.from], sv.v[e.to], sv.theta[e.from], sv.theta[e.to]);
    const double r = ctg ? e.r_max_ctg : e.r_max_base;
    sv.sig_s[at] = std::max({0.0, std::hypot(f.p_o, f.q_o) - r * sv.v[e.from],
                             std::hypot(f.p_d, f.q_d) - r * sv.v[e.to]});
    ++at;
  }
  for (int fi : topo.xfmrs) {
    const auto& x = nc.transformers[fi];
    auto f = transformer_flow(x, sv.v[x.from], sv.v[x.to], sv.theta[x.from], sv.theta[x.to]);
    const double r = ctg ? x.s_max_ctg : x.s_max_base;
    sv.sig_s[at] = std::max({0.0, std::hypot(f.p_o, f.q_o) - r, std::hypot(f.p_d, f.q_d) - r});
    ++at;
  }
}

StateVector restrict_to_state(const NetworkCase& nc, const StateVector& base, int k) {
  auto topo0 = StateTopology::make(nc, 0);
  auto topok = StateTopology::make(nc, k);
  StateVector sv = StateVector::zeros(nc, topok);
  sv.v = base.v;
  sv.theta = base.theta;
  for (size_t gp = 0; gp < topok.gens.size(); ++gp) {
    const int gi = topok.gens[gp];
    const auto& g = nc.generators[gi];
    sv.p[gp] = clamp(base.p[topo0.pos_gen[gi]], g.p_lo, g.p_hi);
    sv.q[gp] = clamp(base.q[topo0.pos_gen[gi]], g.q_lo, g.q_hi);
  }
  sv.delta = 0.0;
  absorb_residuals(nc, topok, sv);
  return sv;
}

double reactive_set_distance(double q, double v, double q_lo, double q_hi,
                             double v_lo, double v_hi, double v0) {
  auto out_of = [](double x, double lo, double hi) {
    return std::max({lo - x, x - hi, 0.0});
  };
  const double d1 = std::hypot(out_of(q, q_lo, q_hi), std::fabs(v - v0));
  const double d2 = std::hypot(std::fabs(q - q_hi), out_of(v, v_lo, v0));
  const double d3 = std::hypot(std::fabs(q - q_lo), out_of(v, v0, v_hi));
  return std::min({d1, d2, d3});
}

DisjunctionGap disjunction_violation(const NetworkCase& nc, int k,
                                     const StateVector& base, const StateVector& ctg) {
  assert(k >= 1 && k <= static_cast<int>(nc.contingencies.size()));
  auto topo0 = StateTopology::make(nc, 0);
  auto topok = StateTopology::make(nc, k);
  DisjunctionGap gap;
  for (size_t gp = 0; gp < topok.gens.size(); ++gp) {
    const int gi = topok.gens[gp];
    const auto& g = nc.generators[gi];
    const int g0 = topo0.pos_gen[gi];
    const double target = clamp(base.p[g0] + g.alpha * ctg.delta, g.p_lo, g.p_hi);
    gap.active = std::max(gap.active, std::fabs(ctg.p[gp] - target));
    const auto& bus = nc.buses[g.bus];
    gap.reactive = std::max(
        gap.reactive, reactive_set_distance(ctg.q[gp], ctg.v[g.bus], g.q_lo, g.q_hi,
                                            bus.v_lo, bus.v_hi, base.v[g.bus]));
  }
  return gap;
}

}  // namespace scopf
